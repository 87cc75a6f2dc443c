#pragma once

// Basis bookkeeping for three qubits (L, M, R) and a cavity truncated to
// photon numbers {0, 1}, plus reduced density matrices of pure states.
//
// Bare basis |phi_m, n>: m is the qubit bitstring with qubit L as the most
// significant bit (0 = ground, 1 = excited), n is the photon number. The flat
// index is 2m + n, so the four two-level subsystems occupy bits
// L = 3, M = 2, R = 1, C = 0 of the flat index.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "quadtangle/types.hpp"

namespace quadtangle {

struct BareIndex {
  int m = 0;  // qubit bitstring, 0..7
  int n = 0;  // photon number, 0..1

  friend bool operator==(const BareIndex&, const BareIndex&) = default;
};

inline int flat_index(BareIndex idx) {
  if (idx.m < 0 || idx.m > 7 || idx.n < 0 || idx.n > 1) {
    throw DomainError("bare index out of range: m=" + std::to_string(idx.m) +
                      " n=" + std::to_string(idx.n));
  }
  return 2 * idx.m + idx.n;
}

inline BareIndex bare_index(int flat) {
  if (flat < 0 || flat >= kDim) {
    throw DomainError("flat index out of range: " + std::to_string(flat));
  }
  return BareIndex{flat >> 1, flat & 1};
}

enum class Subsystem : std::uint8_t { L = 8, M = 4, R = 2, C = 1 };

/// Set of subsystems, stored as a bitmask over flat-index bits.
class SubsystemMask {
 public:
  constexpr SubsystemMask() = default;
  constexpr explicit SubsystemMask(unsigned bits) : bits_(bits & 0xFu) {}
  constexpr SubsystemMask(std::initializer_list<Subsystem> members) {
    for (auto s : members) bits_ |= static_cast<unsigned>(s);
  }

  constexpr unsigned bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(Subsystem s) const {
    return (bits_ & static_cast<unsigned>(s)) != 0;
  }
  constexpr SubsystemMask complement() const { return SubsystemMask(~bits_ & 0xFu); }
  constexpr bool proper() const { return bits_ != 0 && bits_ != 0xFu; }

  friend constexpr bool operator==(SubsystemMask, SubsystemMask) = default;

  std::string to_string() const {
    std::string out = "{";
    const char* names = "LMRC";
    for (int b = 0; b < 4; ++b) {
      if (bits_ & (8u >> b)) {
        if (out.size() > 1) out += ',';
        out += names[b];
      }
    }
    return out + "}";
  }

 private:
  unsigned bits_ = 0;
};

/// Normalized pure state over the 16 bare basis states.
class PureState {
 public:
  static constexpr double kDefaultNormTolerance = 1e-9;

  explicit PureState(const Vec16& amplitudes, double tolerance = kDefaultNormTolerance)
      : amplitudes_(amplitudes) {
    const double norm2 = amplitudes_.squaredNorm();
    if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > tolerance) {
      throw DomainError("state is not normalized: |psi|^2 = " + std::to_string(norm2));
    }
  }

  const Vec16& amplitudes() const { return amplitudes_; }
  Complex operator[](int flat) const { return amplitudes_(flat); }

  static PureState basis(BareIndex idx) {
    Vec16 v = Vec16::Zero();
    v(flat_index(idx)) = 1.0;
    return PureState(v);
  }

 private:
  Vec16 amplitudes_;
};

using ReducedMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

/// Reduced density matrix of 1..3 subsystems; dimension 2, 4 or 8.
struct DensityMatrix {
  ReducedMatrix rho;

  int dim() const { return static_cast<int>(rho.rows()); }
  Complex trace() const { return rho.trace(); }
};

namespace detail {

// Gathers the bits of `flat` selected by `mask` into a compact integer,
// preserving their order (highest selected bit becomes most significant).
constexpr unsigned compress_bits(unsigned flat, unsigned mask) {
  unsigned out = 0;
  for (int b = 3; b >= 0; --b) {
    if (mask & (1u << b)) out = (out << 1) | ((flat >> b) & 1u);
  }
  return out;
}

}  // namespace detail

inline DensityMatrix partial_trace(const PureState& state, SubsystemMask keep) {
  if (!keep.proper()) {
    throw DomainError("partial trace needs a proper nonempty subset, got " + keep.to_string());
  }
  const unsigned kept = keep.bits();
  const unsigned traced = keep.complement().bits();
  const int dk = 1 << keep.size();
  const int dr = kDim / dk;

  Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8> block(dk, dr);
  for (unsigned i = 0; i < static_cast<unsigned>(kDim); ++i) {
    block(detail::compress_bits(i, kept), detail::compress_bits(i, traced)) = state[int(i)];
  }
  DensityMatrix out;
  out.rho = block * block.adjoint();
  return out;
}

/// tr(rho^2). For a Hermitian matrix this is the squared Frobenius norm.
inline double purity(const DensityMatrix& rho) { return rho.rho.squaredNorm(); }

/// Total excitation number: photons plus excited qubits.
inline int excitation_number(int flat) {
  const BareIndex b = bare_index(flat);
  return b.n + std::popcount(static_cast<unsigned>(b.m));
}

}  // namespace quadtangle
