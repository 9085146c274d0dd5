#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rmlab {

// A closed-form tail bound t -> P(deviation > t). Evaluation clamps to
// [0, 1] and every factory below produces a function that is non-increasing
// in t. The constants map records the numeric inputs (sigma_sq, c0, ...) so
// reports can show which instantiation was audited; source is a short tag
// naming the inequality.
class TailBound {
 public:
  TailBound(std::function<double(double)> fn,
            std::map<std::string, double> constants, std::string source);

  // Clamped evaluation; negative t yields the trivial bound 1.
  double operator()(double t) const;

  const std::map<std::string, double>& constants() const { return constants_; }
  const std::string& source() const { return source_; }

 private:
  std::function<double(double)> fn_;
  std::map<std::string, double> constants_;
  std::string source_;
};

// Bennett: t -> exp(-sigma_sq * h(t / sigma_sq)) with
// h(u) = (1 + u) log(1 + u) - u. Requires sigma_sq > 0.
TailBound bennett_tail(double sigma_sq);

// Gaussian concentration for an L-Lipschitz function of a standard normal
// vector: t -> exp(-c0 t^2 / L^2). The classical sharp constant c0 = 1/2 is
// the default; it is a parameter, never hard-coded into call sites.
TailBound gaussian_lipschitz_tail(double lipschitz, double c0 = 0.5);

// Deviation of an exponential-type sum: bounds
//   P( sqrt(sum_i d_i^2 g_i^2) > ||d||_2 + t )  <=  exp(-c0 t^2 / ||d||_inf^2)
// for iid standard normals g_i. The constants map records the center
// ||d||_2 ("center") and the scale ||d||_inf ("sup"). Rejects all-zero d.
TailBound exponential_sum_tail(const std::vector<double>& d, double c0 = 0.5);

// Talagrand-type deviation at scale K: t -> min(1, 4 exp(-(t/K)^2 / 4)).
TailBound talagrand_tail(double k_bound);

// Moment-to-tail conversion: for X with (E X^p)^(1/p) <= sqrt(p) + sqrt(log m)
// for all p >= 1, returns t -> min(1, 2 m exp(-c t^2)). The conservative
// default c = 1/8 is a parameter.
TailBound moments_to_tail(double m_param, double c = 0.125);

// Right-hand side of the sign-randomized tensor-sum moment inequality:
//   big_c (sqrt(p) + sqrt(log m)) max_i ||u_i||_2 ||sum_i u_i (x) u_i||^(1/2)
// where m is the ambient dimension of the family. The operator norm of the
// tensor sum is computed through the spectral module. Rejects an empty
// family or mismatched dimensions.
double rudelson_bound(const std::vector<std::vector<double>>& u, double p,
                      double big_c);

struct TruncationCheck {
  double lhs = 0.0;  // empirical E X 1{X >= m_cut}
  double rhs = 0.0;  // empirical E X^p / m_cut^(p-1)
  bool holds = false;
};

// Empirical check of E X 1{X >= M} <= E X^p / M^(p-1) on non-negative
// samples; holds reports lhs <= rhs (1 + 1e-12). The inequality is pointwise
// for p >= 1, so it holds on every sample set; the check keeps that honest.
TruncationCheck truncation_bound(const std::vector<double>& samples,
                                 double m_cut, double p);

// Sorted sample store with exact exceedance counting.
class EmpiricalTail {
 public:
  explicit EmpiricalTail(std::vector<double> samples);

  // #{samples > t} / count, computed exactly from the sorted array.
  double exceedance(double t) const;

  std::size_t count() const { return samples_.size(); }
  const std::vector<double>& samples() const { return samples_; }

 private:
  std::vector<double> samples_;
};

struct DominationRow {
  double t = 0.0;
  double bound = 0.0;
  double empirical = 0.0;
  std::size_t trials = 0;
  bool dominated = false;  // empirical <= bound + 3 sqrt(bound / trials)
};

// Evaluates bound vs empirical exceedance at each threshold, allowing Monte
// Carlo slack of three standard errors, 3 sqrt(bound(t) / trials).
std::vector<DominationRow> domination_audit(
    const TailBound& bound, const EmpiricalTail& tail,
    const std::vector<double>& thresholds);

// CSV export with header "t,bound,empirical,trials".
void write_tail_csv(std::ostream& out, const std::vector<DominationRow>& rows);

}  // namespace rmlab
