#ifndef HEOMKIT_HEOM_HPP
#define HEOMKIT_HEOM_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "heomkit/bath.hpp"
#include "heomkit/core.hpp"

namespace heomkit
{

// All multi-indices l = (m_1, n_1, ..., m_e, n_e) with |l| <= depth, in
// lexicographic order. Offsets into flat storage follow that order; the
// neighbour tables l +- e_q are built once here.
class HierarchyIndexSet
{
  public:
    static constexpr std::int64_t none = -1;
    static constexpr std::size_t default_max_size = 4'000'000;

    HierarchyIndexSet(int slots, int depth, std::size_t max_size = default_max_size);

    int slots() const { return slots_; }
    int depth() const { return depth_; }
    std::size_t size() const { return size_; }

    std::span<const int> index(std::size_t offset) const;
    int weight(std::size_t offset) const { return weights_[offset]; }

    // Combinatorial rank of a multi-index; throws if it is outside the set.
    std::size_t offset_of(std::span<const int> entries) const;

    // Offset of l + e_q / l - e_q, or `none` when beyond the depth / below zero.
    std::int64_t up(std::size_t offset, int q) const { return up_[offset * slots_ + q]; }
    std::int64_t down(std::size_t offset, int q) const { return down_[offset * slots_ + q]; }

    // Number of multi-indices of `slots` entries with weight <= depth: binomial(depth + slots, slots).
    static std::size_t count(int slots, int depth);

  private:
    int slots_;
    int depth_;
    std::size_t size_;
    std::vector<int> entries_;
    std::vector<int> weights_;
    std::vector<std::int64_t> up_;
    std::vector<std::int64_t> down_;
    std::vector<std::vector<std::size_t>> binom_;  // binom_[b][s] = count(s, b)
};

// Convenience wrapper: `terms` exponentials give 2 * terms slots.
HierarchyIndexSet enumerate_indices(int terms, int depth, std::size_t max_size = HierarchyIndexSet::default_max_size);

// Superoperator bundle of the hierarchy. Slot q (0-based) pairs with the
// bath term k = q / 2: even q carries (alpha_k, beta_k), odd q the complex
// conjugates.
struct Superoperators
{
    Matrix hamiltonian;
    Matrix coupling;
    std::vector<cplx> alpha;
    std::vector<cplx> beta;

    int dimension() const { return int(hamiltonian.rows()); }
    int slots() const { return int(alpha.size()); }

    // -i [H, rho]
    Matrix liouvillian(const Matrix& rho) const;
    // -i [f, rho]
    Matrix phi(const Matrix& rho) const;
    // (i/2) alpha_q ((-1)^(q+1) {f, rho} - [f, rho]), q 0-based
    Matrix psi(int q, const Matrix& rho) const;
};

Superoperators build_superoperators(const Matrix& hamiltonian, const Matrix& coupling, const BathExpansion& bath);

// Full hierarchy of d x d matrices in flat column-major storage; entry 0 is
// the physical reduced density matrix.
struct HierarchyState
{
    std::shared_ptr<const HierarchyIndexSet> indices;
    int dimension = 0;
    std::vector<cplx> data;
    double time = 0.0;

    std::size_t block() const { return std::size_t(dimension) * std::size_t(dimension); }
    Matrix matrix(std::size_t offset) const;
    void set_matrix(std::size_t offset, const Matrix& m);
    Matrix physical() const { return matrix(0); }
};

// rho_0 = initial, every auxiliary matrix zero.
HierarchyState initial_hierarchy_state(std::shared_ptr<const HierarchyIndexSet> indices, const Matrix& rho0);

// Precomputed right-hand side of the hierarchy:
//   d rho_l / dt = (-i H^x - l.beta) rho_l + Phi sum_q rho_{l+e_q} + sum_q l_q Psi_q rho_{l-e_q}
// with rho beyond the depth set to zero. Pure; safe to call concurrently.
class HeomRhs
{
  public:
    // With use_pair_symmetry the input must satisfy rho_{lbar} = rho_l^dagger
    // (lbar swaps each (m_k, n_k) pair), which holds along any trajectory that
    // starts from a Hermitian rho_0; only one member of each pair is evaluated.
    HeomRhs(const Superoperators& ops, std::shared_ptr<const HierarchyIndexSet> indices,
            bool use_pair_symmetry = false);

    std::size_t state_size() const { return indices_->size() * block_; }
    int dimension() const { return dim_; }
    const HierarchyIndexSet& indices() const { return *indices_; }
    std::shared_ptr<const HierarchyIndexSet> shared_indices() const { return indices_; }

    void operator()(std::span<const cplx> in, std::span<cplx> out) const;

    // max(||H||, max Re beta, max |Im beta|)
    double stiffness_bound() const { return stiffness_; }

  private:
    template <int D>
    void apply(std::span<const cplx> in, std::span<cplx> out) const;

    std::shared_ptr<const HierarchyIndexSet> indices_;
    int dim_;
    std::size_t block_;
    struct Entry
    {
        int row, col;
        cplx value;
    };
    std::vector<Entry> h_;  // nonzeros of H and f
    std::vector<Entry> f_;
    bool pair_symmetry_;
    std::vector<std::uint32_t> evaluated_;  // offsets computed directly
    std::vector<std::pair<std::uint32_t, std::uint32_t>> mirrored_;  // (target, source): target = source^dagger
    std::vector<cplx> damping_;  // l . beta per index

    // neighbour lists (CSR)
    std::vector<std::size_t> up_start_;
    std::vector<std::uint32_t> up_offset_;
    struct Lower
    {
        std::uint32_t offset;
        bool left;  // even slot: -i alpha l_q f rho; odd slot: +i conj(alpha) l_q rho f
        cplx coefficient;
    };
    std::vector<std::size_t> down_start_;
    std::vector<Lower> down_;
    double stiffness_;
};

HierarchyState heom_rhs(const HierarchyState& state, const Superoperators& ops);

}  // namespace heomkit

#endif
