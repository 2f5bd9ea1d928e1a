#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "uq/errors.hpp"

namespace uq {

// Dense row-major storage throughout; problem sizes stay in the hundreds.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Seedable pseudo-random stream with a platform-independent output sequence.
///
/// xoshiro256++ seeded through splitmix64. The standard library engines are
/// portable but its distributions are not, so uniform and normal draws are
/// produced here from the raw 64-bit stream.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform draw in [0, 1).
    double uniform01();

    /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// One standard-normal draw (Box-Muller, two uniforms per draw).
    double normal();

    /// Seeded Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n);

    /// First k entries of a partial Fisher-Yates shuffle: k distinct indices
    /// drawn from {0, ..., n-1} without replacement.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
};

/// Derive an independent stream seed from a base seed and a purpose tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

struct CholeskyResult {
    Matrix l;
    double jitter;  // the schedule entry that succeeded
};

inline const std::vector<double>& default_jitter_schedule() {
    static const std::vector<double> schedule{0.0, 1e-8, 1e-6, 1e-4};
    return schedule;
}

/// Lower Cholesky factor of a + jitter*I for the first jitter in the schedule
/// that yields a positive-definite matrix.
///
/// Throws BadConfig if a is not square or not symmetric to 1e-10 relative,
/// NotPositiveDefinite once the schedule is exhausted.
CholeskyResult cholesky(const Matrix& a,
                        const std::vector<double>& jitter_schedule = default_jitter_schedule());

/// Solve l * X = b (or l^T * X = b when transpose) by substitution.
/// Throws SingularTriangular on a zero diagonal entry.
Matrix tri_solve(const Matrix& l, const Matrix& b, bool transpose = false);
Vector tri_solve(const Matrix& l, const Vector& b, bool transpose = false);

/// n i.i.d. standard-normal draws from the stream.
Vector standard_normal(RngStream& rng, std::size_t n);

}  // namespace uq
