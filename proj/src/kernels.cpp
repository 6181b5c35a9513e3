#include "plando/kernels.hpp"

#include <sstream>
#include <vector>

namespace plando {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Gaussian: return "gaussian";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "polynomial" || name == "poly") return KernelKind::Polynomial;
  if (name == "gaussian" || name == "rbf") return KernelKind::Gaussian;
  throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

KernelSpec parse_kernel_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("empty kernel spec");

  auto number = [&](std::size_t i) {
    std::size_t used = 0;
    const double v = std::stod(parts[i], &used);
    if (used != parts[i].size()) throw std::invalid_argument("bad number in kernel spec '" + text + "'");
    return v;
  };

  if (parts[0] == "quadratic") {
    return KernelSpec::quadratic(parts.size() > 1 ? number(1) : 1.0);
  }
  const KernelKind kind = kernel_kind_from_string(parts[0]);
  switch (kind) {
    case KernelKind::Linear:
      if (parts.size() != 1) throw std::invalid_argument("linear kernel takes no arguments");
      return KernelSpec::linear();
    case KernelKind::Polynomial: {
      if (parts.size() < 2 || parts.size() > 3)
        throw std::invalid_argument("expected poly:<degree>[:<offset>]");
      const double degree = number(1);
      if (degree != static_cast<int>(degree)) throw std::invalid_argument("polynomial degree must be an integer");
      return KernelSpec::polynomial(static_cast<int>(degree), parts.size() == 3 ? number(2) : 1.0);
    }
    case KernelKind::Gaussian:
      if (parts.size() > 2) throw std::invalid_argument("expected gaussian[:<lengthscale>]");
      return KernelSpec::gaussian(parts.size() == 2 ? number(1) : 1.0);
  }
  throw std::invalid_argument("unreachable kernel kind");
}

std::string format_kernel_spec(const KernelSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  switch (spec.kind) {
    case KernelKind::Linear: out << "linear"; break;
    case KernelKind::Polynomial: out << "poly:" << spec.degree << ':' << spec.offset; break;
    case KernelKind::Gaussian: out << "gaussian:" << spec.lengthscale; break;
  }
  return out.str();
}

}  // namespace plando
