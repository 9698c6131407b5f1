#pragma once

// Composite Hilbert spaces of truncated bosonic modes and three-level atoms:
// basis enumeration, elementary operators, and the product-term machinery the
// Hamiltonian builders are assembled from.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrep {

using complex_t = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr complex_t imag_unit{0.0, 1.0};

/// Levels |1>, |2>, |3> of a V-type atom. L1 < L2 < L3 fixes the basis order.
enum class AtomLevel : int { L1 = 0, L2 = 1, L3 = 2 };

inline constexpr int level_index(AtomLevel l) { return static_cast<int>(l); }

inline AtomLevel level_from_index(int i) {
  if (i < 0 || i > 2) throw std::out_of_range("atom level index must be in 0..2");
  return static_cast<AtomLevel>(i);
}

enum class ModeKind { photon, phonon };

/// Identifies one bosonic mode of a space.
struct ModeId {
  ModeKind kind;
  int index;
};

inline ModeId photon_mode(int index) { return {ModeKind::photon, index}; }
inline ModeId phonon_mode(int index) { return {ModeKind::phonon, index}; }

/// Thrown when a requested space exceeds the dimension guard.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t default_dimension_guard = 100000;

/// One definite-occupancy basis label: mode occupancies plus atomic levels.
struct CompositeBasisState {
  std::vector<int> photon_occupancies;
  std::vector<int> phonon_occupancies;
  std::vector<AtomLevel> atom_levels;
};

// Immutable descriptor of a composite space.
//
// Canonical ordering of the flat basis index: it is a mixed-radix number whose
// most significant digit is photon mode 0, followed by the remaining photon
// modes, the phonon modes in order, and finally the atoms; the LAST atom is
// the least significant digit (varies fastest). This ordering is stable and
// every fixture, CSV file and test in the project relies on it.
class SpaceDescriptor {
 public:
  SpaceDescriptor(std::vector<int> photon_caps, std::vector<int> phonon_caps,
                  int atom_count, std::int64_t max_dimension = default_dimension_guard)
      : photon_caps_(std::move(photon_caps)),
        phonon_caps_(std::move(phonon_caps)),
        atom_count_(atom_count) {
    for (int c : photon_caps_)
      if (c < 0) throw std::invalid_argument("photon cap must be >= 0");
    for (int c : phonon_caps_)
      if (c < 0) throw std::invalid_argument("phonon cap must be >= 0");
    if (atom_count_ < 0) throw std::invalid_argument("atom count must be >= 0");

    radices_.reserve(subsystem_count());
    for (int c : photon_caps_) radices_.push_back(c + 1);
    for (int c : phonon_caps_) radices_.push_back(c + 1);
    for (int i = 0; i < atom_count_; ++i) radices_.push_back(3);

    dimension_ = 1;
    for (int r : radices_) {
      if (dimension_ > max_dimension / r)
        throw capacity_error("space dimension exceeds guard of " + std::to_string(max_dimension));
      dimension_ *= r;
    }

    strides_.assign(radices_.size(), 1);
    for (int i = static_cast<int>(radices_.size()) - 2; i >= 0; --i)
      strides_[i] = strides_[i + 1] * radices_[i + 1];
  }

  std::int64_t dimension() const { return dimension_; }
  int photon_mode_count() const { return static_cast<int>(photon_caps_.size()); }
  int phonon_mode_count() const { return static_cast<int>(phonon_caps_.size()); }
  int atom_count() const { return atom_count_; }
  int photon_cap(int mode) const { return photon_caps_.at(mode); }
  int phonon_cap(int mode) const { return phonon_caps_.at(mode); }

  int subsystem_count() const {
    return static_cast<int>(photon_caps_.size() + phonon_caps_.size()) + atom_count_;
  }

  // positions of the subsystem groups in the flat label array
  int photon_offset() const { return 0; }
  int phonon_offset() const { return static_cast<int>(photon_caps_.size()); }
  int atom_offset() const { return static_cast<int>(photon_caps_.size() + phonon_caps_.size()); }

  int mode_position(ModeId m) const {
    const auto& caps = (m.kind == ModeKind::photon) ? photon_caps_ : phonon_caps_;
    if (m.index < 0 || m.index >= static_cast<int>(caps.size()))
      throw std::out_of_range("unknown mode identifier");
    return (m.kind == ModeKind::photon ? photon_offset() : phonon_offset()) + m.index;
  }

  int atom_position(int atom) const {
    if (atom < 0 || atom >= atom_count_) throw std::out_of_range("atom index out of range");
    return atom_offset() + atom;
  }

  int radix(int position) const { return radices_[position]; }
  std::int64_t stride(int position) const { return strides_[position]; }

  std::int64_t encode(std::span<const int> labels) const {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < radices_.size(); ++i) idx += labels[i] * strides_[i];
    return idx;
  }

  void decode(std::int64_t index, std::span<int> labels) const {
    for (std::size_t i = 0; i < radices_.size(); ++i) {
      labels[i] = static_cast<int>(index / strides_[i]);
      index %= strides_[i];
    }
  }

  std::int64_t index_of(const CompositeBasisState& s) const {
    if (static_cast<int>(s.photon_occupancies.size()) != photon_mode_count() ||
        static_cast<int>(s.phonon_occupancies.size()) != phonon_mode_count() ||
        static_cast<int>(s.atom_levels.size()) != atom_count_)
      throw std::invalid_argument("basis state does not match the space layout");
    std::vector<int> labels(subsystem_count());
    for (int i = 0; i < photon_mode_count(); ++i) {
      int n = s.photon_occupancies[i];
      if (n < 0 || n > photon_caps_[i]) throw std::out_of_range("photon occupancy over cap");
      labels[photon_offset() + i] = n;
    }
    for (int i = 0; i < phonon_mode_count(); ++i) {
      int n = s.phonon_occupancies[i];
      if (n < 0 || n > phonon_caps_[i]) throw std::out_of_range("phonon occupancy over cap");
      labels[phonon_offset() + i] = n;
    }
    for (int i = 0; i < atom_count_; ++i)
      labels[atom_offset() + i] = level_index(s.atom_levels[i]);
    return encode(labels);
  }

  CompositeBasisState state_at(std::int64_t index) const {
    if (index < 0 || index >= dimension_) throw std::out_of_range("basis index out of range");
    std::vector<int> labels(subsystem_count());
    decode(index, labels);
    CompositeBasisState s;
    s.photon_occupancies.assign(labels.begin(), labels.begin() + photon_mode_count());
    s.phonon_occupancies.assign(labels.begin() + phonon_offset(),
                                labels.begin() + phonon_offset() + phonon_mode_count());
    s.atom_levels.reserve(atom_count_);
    for (int i = 0; i < atom_count_; ++i)
      s.atom_levels.push_back(level_from_index(labels[atom_offset() + i]));
    return s;
  }

  friend bool operator==(const SpaceDescriptor& a, const SpaceDescriptor& b) {
    return a.photon_caps_ == b.photon_caps_ && a.phonon_caps_ == b.phonon_caps_ &&
           a.atom_count_ == b.atom_count_;
  }

 private:
  std::vector<int> photon_caps_;
  std::vector<int> phonon_caps_;
  int atom_count_;
  std::vector<int> radices_;
  std::vector<std::int64_t> strides_;
  std::int64_t dimension_;
};

inline SpaceDescriptor build_space(std::vector<int> photon_caps, std::vector<int> phonon_caps,
                                   int atom_count,
                                   std::int64_t max_dimension = default_dimension_guard) {
  return SpaceDescriptor(std::move(photon_caps), std::move(phonon_caps), atom_count,
                         max_dimension);
}

inline std::int64_t basis_index(const SpaceDescriptor& space, const CompositeBasisState& state) {
  return space.index_of(state);
}

inline CompositeBasisState basis_state(const SpaceDescriptor& space, std::int64_t index) {
  return space.state_at(index);
}

/// A ket over a composite space. Branch vectors may be unnormalized but never
/// carry more than unit weight.
class StateVector {
 public:
  StateVector(SpaceDescriptor space, Vector amplitudes)
      : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != space_.dimension())
      throw std::invalid_argument("amplitude count does not match space dimension");
    if (squared_norm() > 1.0 + 1e-12)
      throw std::invalid_argument("state vector carries more than unit weight");
  }

  const SpaceDescriptor& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }
  complex_t amplitude(std::int64_t index) const { return amplitudes_(index); }
  double squared_norm() const { return amplitudes_.squaredNorm(); }

 private:
  SpaceDescriptor space_;
  Vector amplitudes_;
};

/// Dense operator over a composite space. When flagged hermitian the matrix is
/// checked against its adjoint at construction.
class OperatorMatrix {
 public:
  OperatorMatrix(SpaceDescriptor space, Matrix entries, bool hermitian)
      : space_(std::move(space)), entries_(std::move(entries)), hermitian_(hermitian) {
    if (entries_.rows() != entries_.cols() || entries_.rows() != space_.dimension())
      throw std::invalid_argument("operator entries must be square with side = dimension");
    if (hermitian_) {
      const double dev = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
      if (dev >= 1e-12)
        throw std::invalid_argument("operator flagged hermitian deviates from its adjoint");
    }
  }

  const SpaceDescriptor& space() const { return space_; }
  const Matrix& entries() const { return entries_; }
  bool hermitian() const { return hermitian_; }

 private:
  SpaceDescriptor space_;
  Matrix entries_;
  bool hermitian_;
};

// ---------------------------------------------------------------------------
// product-term machinery
//
// Every Hamiltonian handled here is a sum of products of ladder and transition
// operators. Each such factor maps a basis state to at most one basis state,
// so a product term fills at most one entry per matrix column and a dense
// build costs O(terms * dimension).
// ---------------------------------------------------------------------------

class OpFactor {
 public:
  static OpFactor create(ModeId m) { return OpFactor(Kind::create, m, 0, 0, 0); }
  static OpFactor annihilate(ModeId m) { return OpFactor(Kind::annihilate, m, 0, 0, 0); }
  /// |l><m| on one atom
  static OpFactor transition(int atom, AtomLevel l, AtomLevel m) {
    return OpFactor(Kind::transition, ModeId{ModeKind::photon, 0}, atom, level_index(l),
                    level_index(m));
  }

  /// Hermitian conjugate of this factor.
  OpFactor conjugated() const {
    OpFactor f = *this;
    if (kind_ == Kind::create)
      f.kind_ = Kind::annihilate;
    else if (kind_ == Kind::annihilate)
      f.kind_ = Kind::create;
    else
      std::swap(f.to_, f.from_);
    return f;
  }

  void validate(const SpaceDescriptor& space) const {
    if (kind_ == Kind::transition)
      space.atom_position(atom_);
    else
      space.mode_position(mode_);
  }

  /// Applies the factor in place to a flat label array; returns the amplitude
  /// factor (0 means the state is annihilated or truncated away).
  double apply(const SpaceDescriptor& space, std::span<int> labels) const {
    switch (kind_) {
      case Kind::create: {
        const int pos = space.mode_position(mode_);
        const int n = labels[pos];
        if (n + 1 >= space.radix(pos)) return 0.0;  // truncation cap
        labels[pos] = n + 1;
        return std::sqrt(static_cast<double>(n + 1));
      }
      case Kind::annihilate: {
        const int pos = space.mode_position(mode_);
        const int n = labels[pos];
        if (n == 0) return 0.0;
        labels[pos] = n - 1;
        return std::sqrt(static_cast<double>(n));
      }
      case Kind::transition: {
        const int pos = space.atom_position(atom_);
        if (labels[pos] != from_) return 0.0;
        labels[pos] = to_;
        return 1.0;
      }
    }
    return 0.0;
  }

 private:
  enum class Kind { create, annihilate, transition };

  OpFactor(Kind kind, ModeId mode, int atom, int to, int from)
      : kind_(kind), mode_(mode), atom_(atom), to_(to), from_(from) {}

  Kind kind_;
  ModeId mode_;
  int atom_;
  int to_, from_;
};

/// coefficient * product of factors; factors act right to left, as written.
struct ProductTerm {
  complex_t coefficient;
  std::vector<OpFactor> factors;
};

inline ProductTerm conjugate(const ProductTerm& t) {
  ProductTerm c;
  c.coefficient = std::conj(t.coefficient);
  c.factors.reserve(t.factors.size());
  for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it)
    c.factors.push_back(it->conjugated());
  return c;
}

/// Appends a term together with its Hermitian conjugate.
inline void push_with_conjugate(std::vector<ProductTerm>& terms, ProductTerm t) {
  terms.push_back(t);
  terms.push_back(conjugate(t));
}

inline Matrix build_matrix(const SpaceDescriptor& space, std::span<const ProductTerm> terms) {
  for (const auto& t : terms)
    for (const auto& f : t.factors) f.validate(space);

  const std::int64_t dim = space.dimension();
  Matrix h = Matrix::Zero(dim, dim);
  std::vector<int> labels(space.subsystem_count());
  std::vector<int> scratch(space.subsystem_count());
  for (std::int64_t col = 0; col < dim; ++col) {
    space.decode(col, labels);
    for (const auto& t : terms) {
      std::copy(labels.begin(), labels.end(), scratch.begin());
      complex_t amp = t.coefficient;
      bool alive = true;
      for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) {
        const double f = it->apply(space, scratch);
        if (f == 0.0) {
          alive = false;
          break;
        }
        amp *= f;
      }
      if (alive) h(space.encode(scratch), col) += amp;
    }
  }
  return h;
}

/// Annihilation operator of one mode: <n-1|a|n> = sqrt(n) within truncation.
inline OperatorMatrix mode_annihilator(const SpaceDescriptor& space, ModeId mode) {
  space.mode_position(mode);  // reject unknown modes
  std::vector<ProductTerm> terms{{complex_t{1.0, 0.0}, {OpFactor::annihilate(mode)}}};
  return OperatorMatrix(space, build_matrix(space, terms), false);
}

/// Transition |l><m| on the chosen atom, identity elsewhere.
inline OperatorMatrix atomic_transition(const SpaceDescriptor& space, int atom_index, AtomLevel l,
                                        AtomLevel m) {
  space.atom_position(atom_index);
  std::vector<ProductTerm> terms{{complex_t{1.0, 0.0}, {OpFactor::transition(atom_index, l, m)}}};
  return OperatorMatrix(space, build_matrix(space, terms), l == m);
}

/// Selection of subsystems, used for measuring and for partial traces.
struct SubsystemSet {
  std::vector<int> photon_modes;
  std::vector<int> phonon_modes;
  std::vector<int> atoms;

  bool empty() const { return photon_modes.empty() && phonon_modes.empty() && atoms.empty(); }
};

}  // namespace qrep
