#include "glauberlab/spin/random.hpp"

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::spin {

SpinHamiltonian random_hamiltonian(const RandomHamiltonianOptions& opts, std::uint64_t seed) {
  if (opts.n < 0 || opts.n > 62) throw DomainError("random_hamiltonian supports 0 <= n <= 62");
  if (opts.max_degree < 0) throw DomainError("max_degree must be nonnegative");
  if (opts.density < 0.0 || opts.density > 1.0) throw DomainError("density must lie in [0,1]");
  CounterRng rng(seed, 0x4a11);
  std::map<SiteSet, double> terms;
  for (int d = 1; d <= std::min(opts.max_degree, opts.n); ++d) {
    for (Mask m : k_subsets(opts.n, d)) {
      if (opts.density < 1.0 && rng.uniform() >= opts.density) continue;
      double c = 0.0;
      if (opts.law == CoefficientLaw::gaussian) {
        c = opts.scale * rng.normal();
      } else {
        const double sign = (rng() >> 63) != 0 ? -1.0 : 1.0;
        c = sign * opts.scale * rng.exponential();
      }
      SiteSet sites;
      for (int b : mask_elements(m)) sites.push_back(b + 1);
      terms.emplace(std::move(sites), c);
    }
  }
  return SpinHamiltonian(opts.n, std::move(terms));
}

Matrix random_coupling(int n, double scale, std::uint64_t seed) {
  CounterRng rng(seed, 0xc0f1);
  Matrix j = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) j(a, b) = j(b, a) = scale * rng.normal();
  return j;
}

}  // namespace glauberlab::spin
