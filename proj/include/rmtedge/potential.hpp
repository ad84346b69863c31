#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rmtedge {

/// Symmetry class of the invariant ensemble.
enum class Beta : int { orthogonal = 1, unitary = 2, symplectic = 4 };

/// Throws std::invalid_argument unless b is 1, 2 or 4.
Beta parse_beta(int b);

inline int to_int(Beta b) { return static_cast<int>(b); }

/// Polynomial potential V(x) = k_0 + k_1 x + ... + k_{2m} x^{2m}.
///
/// Coefficients are stored lowest degree first and the degree is the list
/// length minus one. Construction rejects odd degree and a non-positive
/// leading coefficient, so every instance defines a weight e^{-V} with
/// finite moments of all orders.
class Potential {
 public:
  explicit Potential(std::vector<double> coefficients);

  /// V(x) = x^2, the Gaussian (Hermite) case, m = 1.
  static Potential hermite();
  /// V(x) = x^4, the smallest case with a 3x3 Widom block, m = 2.
  static Potential quartic();
  /// "hermite" or "quartic"; anything else throws std::invalid_argument.
  static Potential preset(std::string_view name);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  int m() const { return degree() / 2; }
  /// Widom block size n = 2m - 1.
  int block_size() const { return degree() - 1; }
  double leading() const { return coeffs_.back(); }
  /// Coefficient of x^k, zero beyond the degree.
  double coefficient(int k) const;
  bool is_even() const;

  const std::vector<double>& coefficients() const { return coeffs_; }

  friend bool operator==(const Potential&, const Potential&) = default;

 private:
  std::vector<double> coeffs_;
};

double eval_V(const Potential& p, double x);

/// w_beta(x): e^{-V} for beta = 2 and 4 (V_4 = V/2, w_4 = e^{-2 V_4}),
/// e^{-V/2} for beta = 1.
double weight(const Potential& p, Beta beta, double x);

/// {"coefficients": [k_0, ..., k_2m]}
nlohmann::json to_json(const Potential& p);
Potential potential_from_json(const nlohmann::json& j);

/// Accepts a preset name, a comma separated coefficient list ("0,0,1"),
/// or a path to a JSON file holding {"coefficients": [...]}.
Potential parse_potential(const std::string& text);

}  // namespace rmtedge
