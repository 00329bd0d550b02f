#include "fixtures.hpp"

#include "mrcdd/random.hpp"

namespace mrcdd::testing {

LtiSystem paper_plant() { return LtiSystem(bench::paper_plant_a(), bench::paper_plant_b()); }

ReferenceModel paper_model() {
  return ReferenceModel(0.2 * Matrix::Identity(3, 3), 0.8 * Matrix::Identity(3, 3));
}

Trajectory paper_trajectory(Eigen::Index t_len, double variance, std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, 1));
  const Matrix u = rng.uniform_matrix(3, t_len, -2.0, 2.0);
  return simulate_open_loop(paper_plant(), u, Vector::Zero(3), {variance, derive_seed(seed, 2)});
}

ProjectedData paper_noise_free_projection(Eigen::Index t_len, std::uint64_t seed) {
  return project(build_experiment_data(paper_trajectory(t_len, 0.0, seed), false), true);
}

FeasiblePlant random_feasible_plant(std::uint64_t seed, Eigen::Index n, Eigen::Index m) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RandomStream rng(derive_seed(seed, attempt));
    const Matrix a = rng.uniform_matrix(n, n, -0.8, 0.8);
    Matrix b = rng.uniform_matrix(n, m, -1.0, 1.0);
    b.topLeftCorner(std::min(n, m), std::min(n, m)) += 1.5 * Matrix::Identity(std::min(n, m), std::min(n, m));
    const Matrix kx = rng.uniform_matrix(m, n, -0.5, 0.5);
    const Matrix kr = rng.uniform_matrix(m, n, -1.0, 1.0);
    const Matrix am = a + b * kx;
    // Open-loop data from an unstable plant grows geometrically and is useless.
    if (spectral_radius(a) >= 0.95 || spectral_radius(am) >= 0.9) continue;
    return {LtiSystem(a, b), ReferenceModel(am, b * kr), kx, kr};
  }
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace mrcdd::testing
