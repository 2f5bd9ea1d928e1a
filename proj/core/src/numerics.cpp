#include "uq/numerics.hpp"

#include <cmath>
#include <numbers>

namespace uq {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw BadConfig("uniform_below: bound must be positive");
    const std::uint64_t threshold = (~bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

double RngStream::normal() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw BadConfig("sample_without_replacement: k exceeds n");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t x = base ^ (0x6a09e667f3bcc909ULL + tag * 0x9e3779b97f4a7c15ULL);
    return splitmix64(x);
}

CholeskyResult cholesky(const Matrix& a, const std::vector<double>& jitter_schedule) {
    if (a.rows() != a.cols()) throw BadConfig("cholesky: matrix must be square");
    if (jitter_schedule.empty()) throw BadConfig("cholesky: empty jitter schedule");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(scale, 1.0)) {
        throw BadConfig("cholesky: matrix not symmetric");
    }

    for (double jitter : jitter_schedule) {
        Matrix work = a;
        work.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(work);
        if (llt.info() == Eigen::Success) {
            Matrix l = llt.matrixL();
            // LLT can report success with a non-finite factor on some inputs.
            if (l.allFinite() && (l.diagonal().array() > 0.0).all()) {
                return {std::move(l), jitter};
            }
        }
    }
    throw NotPositiveDefinite("cholesky: jitter schedule exhausted");
}

Matrix tri_solve(const Matrix& l, const Matrix& b, bool transpose) {
    if (l.rows() != l.cols()) throw BadConfig("tri_solve: factor must be square");
    if (l.rows() != b.rows()) throw BadConfig("tri_solve: incompatible shapes");
    if ((l.diagonal().array() == 0.0).any()) {
        throw SingularTriangular("tri_solve: zero diagonal entry");
    }
    if (transpose) {
        return l.transpose().triangularView<Eigen::Upper>().solve(b);
    }
    return l.triangularView<Eigen::Lower>().solve(b);
}

Vector tri_solve(const Matrix& l, const Vector& b, bool transpose) {
    Matrix bm = b;
    return tri_solve(l, bm, transpose).col(0);
}

Vector standard_normal(RngStream& rng, std::size_t n) {
    if (n < 1) throw BadConfig("standard_normal: n must be at least 1");
    Vector out(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.normal();
    return out;
}

}  // namespace uq
