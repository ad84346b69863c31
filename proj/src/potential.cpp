#include "rmtedge/potential.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rmtedge {

Beta parse_beta(int b) {
  switch (b) {
    case 1: return Beta::orthogonal;
    case 2: return Beta::unitary;
    case 4: return Beta::symplectic;
    default:
      throw std::invalid_argument("beta must be 1, 2 or 4, got " + std::to_string(b));
  }
}

Potential::Potential(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.size() < 3) throw std::invalid_argument("potential degree must be at least 2");
  if ((coeffs_.size() - 1) % 2 != 0)
    throw std::invalid_argument("potential degree must be even");
  if (!(coeffs_.back() > 0.0))
    throw std::invalid_argument("leading coefficient must be positive");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite potential coefficient");
}

Potential Potential::hermite() { return Potential({0.0, 0.0, 1.0}); }

Potential Potential::quartic() { return Potential({0.0, 0.0, 0.0, 0.0, 1.0}); }

Potential Potential::preset(std::string_view name) {
  if (name == "hermite") return hermite();
  if (name == "quartic") return quartic();
  throw std::invalid_argument("unknown potential preset '" + std::string(name) + "'");
}

double Potential::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double Potential::derivative(double x) const {
  double acc = 0.0;
  for (int k = degree(); k >= 1; --k) acc = acc * x + k * coeffs_[k];
  return acc;
}

double Potential::second_derivative(double x) const {
  double acc = 0.0;
  for (int k = degree(); k >= 2; --k) acc = acc * x + k * (k - 1) * coeffs_[k];
  return acc;
}

double Potential::coefficient(int k) const {
  return (k >= 0 && k <= degree()) ? coeffs_[k] : 0.0;
}

bool Potential::is_even() const {
  for (int k = 1; k <= degree(); k += 2)
    if (coeffs_[k] != 0.0) return false;
  return true;
}

double eval_V(const Potential& p, double x) { return p(x); }

double weight(const Potential& p, Beta beta, double x) {
  switch (beta) {
    case Beta::unitary:
    case Beta::symplectic: return std::exp(-p(x));
    case Beta::orthogonal: return std::exp(-0.5 * p(x));
  }
  throw std::invalid_argument("invalid beta");
}

nlohmann::json to_json(const Potential& p) { return {{"coefficients", p.coefficients()}}; }

Potential potential_from_json(const nlohmann::json& j) {
  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    throw std::invalid_argument("potential JSON needs a 'coefficients' array");
  return Potential(j["coefficients"].get<std::vector<double>>());
}

Potential parse_potential(const std::string& text) {
  if (text == "hermite" || text == "quartic") return Potential::preset(text);
  if (std::filesystem::exists(text)) {
    std::ifstream in(text);
    return potential_from_json(nlohmann::json::parse(in));
  }
  std::vector<double> coeffs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse potential '" + text + "'");
    }
    if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("cannot parse potential '" + text + "'");
    coeffs.push_back(v);
  }
  return Potential(std::move(coeffs));
}

}  // namespace rmtedge
