#include "riobs/decomposition.hpp"

#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace riobs {

namespace {

constexpr double kDomainSlack = 1e-9;

void check_in_domain(const VectorXd& z, const IntervalVector& domain,
                     const char* who) {
  if (z.size() != domain.size())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (!domain.contains(z, kDomainSlack))
    throw std::domain_error(std::string(who) +
                            ": argument outside the decomposition domain");
}

}  // namespace

JssForm jss_decompose(const DifferentiableMap& f, SlopePolicy policy) {
  if (!f.jac_lo.allFinite() || !f.jac_hi.allFinite())
    throw std::invalid_argument("jss_decompose: non-finite Jacobian bounds");
  if ((f.jac_lo.array() > f.jac_hi.array()).any())
    throw std::invalid_argument("jss_decompose: jac_lo exceeds jac_hi");

  JssForm jss;
  jss.H = (policy == SlopePolicy::Upper) ? f.jac_hi : f.jac_lo;

  const MatrixXd mu_lo = f.jac_lo - jss.H;
  const MatrixXd mu_hi = f.jac_hi - jss.H;
  // Sign stability: each remainder Jacobian interval must not straddle zero.
  // Holds by construction for the pure policies above.
  if (((mu_lo.array() < 0.0) && (mu_hi.array() > 0.0)).any())
    throw std::invalid_argument("jss_decompose: remainder not sign-stable");

  MatrixXd H = jss.H;
  std::function<VectorXd(const VectorXd&)> base = f.eval;
  jss.mu.eval = [base, H](const VectorXd& z) -> VectorXd {
    return base(z) - H * z;
  };
  jss.mu.jac_lo = mu_lo;
  jss.mu.jac_hi = mu_hi;
  jss.mu.domain = f.domain;

  // Entry (i,j) is driven by z1 iff the remainder is nondecreasing there,
  // i.e. the whole Jacobian interval sits in R>=0. Entries with mu_hi = 0
  // (the Upper policy makes all of them so) are nonincreasing and must pick
  // z2, which deciding on mu_lo alone gets right where sgn(mu_hi) would not.
  jss.increasing = (mu_lo.array() >= 0.0).cast<double>();

  jss.F_bar = 2.0 * (f.jac_hi - jss.H).cwiseMax(0.0) - f.jac_lo + jss.H;
  return jss;
}

std::vector<MatrixXd> selector_matrices(const JssForm& jss) {
  std::vector<MatrixXd> out;
  out.reserve(static_cast<size_t>(jss.out_dim()));
  for (Eigen::Index i = 0; i < jss.out_dim(); ++i)
    out.push_back(MatrixXd(jss.increasing.row(i).asDiagonal()));
  return out;
}

VectorXd tight_decomp(const JssForm& jss, const VectorXd& z1,
                      const VectorXd& z2) {
  check_in_domain(z1, jss.mu.domain, "tight_decomp");
  check_in_domain(z2, jss.mu.domain, "tight_decomp");

  const Eigen::Index p = jss.out_dim();
  const Eigen::Index n = jss.in_dim();
  VectorXd out(p);

  // Rows sharing a selector pattern share one remainder evaluation.
  if (n <= 63) {
    std::unordered_map<std::uint64_t, VectorXd> cache;
    for (Eigen::Index i = 0; i < p; ++i) {
      std::uint64_t key = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (jss.increasing(i, j) != 0.0) key |= (1ULL << j);
      auto it = cache.find(key);
      if (it == cache.end()) {
        VectorXd arg(n);
        for (Eigen::Index j = 0; j < n; ++j)
          arg(j) = jss.increasing(i, j) != 0.0 ? z1(j) : z2(j);
        it = cache.emplace(key, jss.mu.eval(arg)).first;
      }
      out(i) = it->second(i);
    }
  } else {
    for (Eigen::Index i = 0; i < p; ++i) {
      VectorXd arg(n);
      for (Eigen::Index j = 0; j < n; ++j)
        arg(j) = jss.increasing(i, j) != 0.0 ? z1(j) : z2(j);
      out(i) = jss.mu.eval(arg)(i);
    }
  }
  return out;
}

IntervalVector embed_step(const JssForm& jss, const IntervalVector& box) {
  if (!box.valid()) throw std::invalid_argument("embed_step: invalid box");
  if (!jss.mu.domain.contains(box, kDomainSlack))
    throw std::domain_error("embed_step: box outside the decomposition domain");
  MatrixSplit hs = split(jss.H);
  return {hs.pos * box.lo - hs.neg * box.hi + tight_decomp(jss, box.lo, box.hi),
          hs.pos * box.hi - hs.neg * box.lo + tight_decomp(jss, box.hi, box.lo)};
}

}  // namespace riobs
