#include "heomkit/heom.hpp"

#include <algorithm>
#include <sstream>

namespace heomkit
{

std::size_t HierarchyIndexSet::count(int slots, int depth)
{
    require(slots >= 0 && depth >= 0, "index count needs slots, depth >= 0");
    // binomial(depth + slots, slots) without overflow for the sizes we accept
    long double c = 1.0L;
    for(int i = 1; i <= slots; ++i) c = c * (long double)(depth + i) / (long double)i;
    return std::size_t(c + 0.5L);
}

HierarchyIndexSet::HierarchyIndexSet(int slots, int depth, std::size_t max_size) : slots_(slots), depth_(depth)
{
    require(slots >= 1, "hierarchy needs at least one slot");
    require(depth >= 0, "hierarchy depth must be >= 0");
    const long double estimate = [&] {
        long double c = 1.0L;
        for(int i = 1; i <= slots; ++i) c = c * (long double)(depth + i) / (long double)i;
        return c;
    }();
    if(estimate > (long double)max_size)
    {
        std::ostringstream os;
        os << "hierarchy with " << slots << " slots and depth " << depth << " has " << double(estimate)
           << " matrices, above the budget of " << max_size;
        fail(ErrorCode::budget_exceeded, os.str());
    }
    size_ = count(slots, depth);

    binom_.assign(depth + 1, std::vector<std::size_t>(slots + 1));
    for(int b = 0; b <= depth; ++b)
        for(int s = 0; s <= slots; ++s) binom_[b][s] = count(s, b);

    entries_.reserve(size_ * slots_);
    weights_.reserve(size_);

    // lexicographic enumeration
    std::vector<int> cur(slots_, 0);
    auto generate = [&](auto&& self, int pos, int used) -> void {
        if(pos == slots_)
        {
            entries_.insert(entries_.end(), cur.begin(), cur.end());
            weights_.push_back(used);
            return;
        }
        for(int v = 0; v + used <= depth_; ++v)
        {
            cur[pos] = v;
            self(self, pos + 1, used + v);
        }
        cur[pos] = 0;
    };
    generate(generate, 0, 0);
    if(weights_.size() != size_) fail(ErrorCode::numerical_failure, "hierarchy enumeration size mismatch");

    up_.assign(size_ * slots_, none);
    down_.assign(size_ * slots_, none);
    std::vector<int> probe(slots_);
    for(std::size_t m = 0; m < size_; ++m)
    {
        auto e = index(m);
        for(int q = 0; q < slots_; ++q)
        {
            std::copy(e.begin(), e.end(), probe.begin());
            if(weights_[m] < depth_)
            {
                ++probe[q];
                up_[m * slots_ + q] = std::int64_t(offset_of(probe));
                --probe[q];
            }
            if(probe[q] > 0)
            {
                --probe[q];
                down_[m * slots_ + q] = std::int64_t(offset_of(probe));
            }
        }
    }
}

std::span<const int> HierarchyIndexSet::index(std::size_t offset) const
{
    require(offset < size_, "hierarchy offset out of range");
    return {entries_.data() + offset * slots_, std::size_t(slots_)};
}

std::size_t HierarchyIndexSet::offset_of(std::span<const int> entries) const
{
    require(int(entries.size()) == slots_, "multi-index has the wrong number of entries");
    int used = 0;
    for(int v : entries)
    {
        require(v >= 0, "multi-index entries must be nonnegative");
        used += v;
    }
    require(used <= depth_, "multi-index weight above the truncation depth");

    // rank = number of lexicographically smaller members
    std::size_t rank = 0;
    int prefix = 0;
    for(int j = 0; j < slots_; ++j)
    {
        const int rest = slots_ - j - 1;
        for(int v = 0; v < entries[j]; ++v) rank += binom_[depth_ - prefix - v][rest];
        prefix += entries[j];
    }
    return rank;
}

HierarchyIndexSet enumerate_indices(int terms, int depth, std::size_t max_size)
{
    require(terms >= 1, "hierarchy needs at least one bath term");
    return HierarchyIndexSet(2 * terms, depth, max_size);
}

Matrix Superoperators::liouvillian(const Matrix& rho) const { return -I * commutator(hamiltonian, rho); }

Matrix Superoperators::phi(const Matrix& rho) const { return -I * commutator(coupling, rho); }

Matrix Superoperators::psi(int q, const Matrix& rho) const
{
    require(q >= 0 && q < slots(), "Psi slot out of range");
    const double sign = (q % 2 == 0) ? -1.0 : 1.0;  // (-1)^p with p = q + 1
    return (0.5 * I * alpha[q]) * (sign * anticommutator(coupling, rho) - commutator(coupling, rho));
}

Superoperators build_superoperators(const Matrix& hamiltonian, const Matrix& coupling, const BathExpansion& bath)
{
    if(hamiltonian.rows() != hamiltonian.cols() || coupling.rows() != coupling.cols() ||
       hamiltonian.rows() != coupling.rows())
        fail(ErrorCode::dimension_mismatch, "system Hamiltonian and coupling must be square and of equal size");
    require(is_hermitian(hamiltonian), "system Hamiltonian must be Hermitian");
    require(is_hermitian(coupling), "coupling operator must be Hermitian");
    require(!bath.terms.empty(), "bath expansion has no terms");

    Superoperators ops;
    ops.hamiltonian = hamiltonian;
    ops.coupling = coupling;
    for(const auto& t : bath.terms)
    {
        require(t.rate.real() > 0.0, "every bath exponential must decay (Re beta > 0)");
        ops.alpha.push_back(t.amplitude);
        ops.alpha.push_back(std::conj(t.amplitude));
        ops.beta.push_back(t.rate);
        ops.beta.push_back(std::conj(t.rate));
    }
    return ops;
}

Matrix HierarchyState::matrix(std::size_t offset) const
{
    require(offset < indices->size(), "hierarchy offset out of range");
    return Eigen::Map<const Matrix>(data.data() + offset * block(), dimension, dimension);
}

void HierarchyState::set_matrix(std::size_t offset, const Matrix& m)
{
    require(offset < indices->size(), "hierarchy offset out of range");
    if(m.rows() != dimension || m.cols() != dimension)
        fail(ErrorCode::dimension_mismatch, "matrix does not match the hierarchy dimension");
    Eigen::Map<Matrix>(data.data() + offset * block(), dimension, dimension) = m;
}

HierarchyState initial_hierarchy_state(std::shared_ptr<const HierarchyIndexSet> indices, const Matrix& rho0)
{
    require(rho0.rows() == rho0.cols(), "initial density matrix must be square");
    HierarchyState s;
    s.indices = std::move(indices);
    s.dimension = int(rho0.rows());
    s.data.assign(s.indices->size() * s.block(), cplx{});
    s.set_matrix(0, rho0);
    return s;
}

HeomRhs::HeomRhs(const Superoperators& ops, std::shared_ptr<const HierarchyIndexSet> indices, bool use_pair_symmetry)
    : indices_(std::move(indices)), dim_(ops.dimension()), block_(std::size_t(dim_) * std::size_t(dim_)),
      pair_symmetry_(use_pair_symmetry)
{
    require(indices_ != nullptr, "hierarchy index set is null");
    if(indices_->slots() != ops.slots() || ops.beta.size() != ops.alpha.size())
        fail(ErrorCode::dimension_mismatch, "bath slot count does not match the hierarchy index length");
    if(ops.coupling.rows() != dim_) fail(ErrorCode::dimension_mismatch, "coupling dimension mismatch");
    if(indices_->size() > std::size_t(UINT32_MAX)) fail(ErrorCode::budget_exceeded, "hierarchy too large");

    for(int c = 0; c < dim_; ++c)
        for(int r = 0; r < dim_; ++r)
        {
            if(ops.hamiltonian(r, c) != cplx{}) h_.push_back({r, c, ops.hamiltonian(r, c)});
            if(ops.coupling(r, c) != cplx{}) f_.push_back({r, c, ops.coupling(r, c)});
        }

    const std::size_t n = indices_->size();
    const int slots = indices_->slots();
    damping_.resize(n);
    up_start_.assign(n + 1, 0);
    down_start_.assign(n + 1, 0);
    for(std::size_t m = 0; m < n; ++m)
    {
        auto e = indices_->index(m);
        cplx lb{};
        for(int q = 0; q < slots; ++q)
        {
            lb += double(e[q]) * ops.beta[q];
            const auto u = indices_->up(m, q);
            if(u != HierarchyIndexSet::none) up_offset_.push_back(std::uint32_t(u));
            const auto d = indices_->down(m, q);
            if(d != HierarchyIndexSet::none)
                down_.push_back({std::uint32_t(d), q % 2 == 0, double(e[q]) * ops.alpha[q]});
        }
        damping_[m] = lb;
        up_start_[m + 1] = up_offset_.size();
        down_start_[m + 1] = down_.size();
    }

    std::vector<int> mirror(slots);
    for(std::size_t m = 0; m < n; ++m)
    {
        if(!pair_symmetry_)
        {
            evaluated_.push_back(std::uint32_t(m));
            continue;
        }
        auto e = indices_->index(m);
        for(int q = 0; q < slots; q += 2)
        {
            mirror[q] = e[q + 1];
            mirror[q + 1] = e[q];
        }
        const std::size_t partner = indices_->offset_of(mirror);
        if(partner < m) continue;
        evaluated_.push_back(std::uint32_t(m));
        if(partner > m) mirrored_.push_back({std::uint32_t(partner), std::uint32_t(m)});
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.hamiltonian, Eigen::EigenvaluesOnly);
    stiffness_ = es.eigenvalues().cwiseAbs().maxCoeff();
    for(const auto& b : ops.beta) stiffness_ = std::max({stiffness_, b.real(), std::abs(b.imag())});
}

template <int D>
void HeomRhs::apply(std::span<const cplx> in, std::span<cplx> out) const
{
    const int d = (D > 0) ? D : dim_;
    const std::size_t blk = std::size_t(d) * std::size_t(d);
    std::vector<cplx> lbuf(blk), rbuf(blk), acc(blk);

    for(const std::uint32_t m : evaluated_)
    {
        const cplx* rho = in.data() + m * blk;
        cplx* dst = out.data() + m * blk;
        cplx* left = lbuf.data();
        cplx* right = rbuf.data();
        std::fill(left, left + blk, cplx{});
        std::fill(right, right + blk, cplx{});

        // the sum of upper neighbours enters both sides of -i[f, A]
        for(std::size_t u = up_start_[m]; u < up_start_[m + 1]; ++u)
        {
            const cplx* src = in.data() + std::size_t(up_offset_[u]) * blk;
            for(std::size_t i = 0; i < blk; ++i)
            {
                left[i] += src[i];
                right[i] += src[i];
            }
        }
        for(std::size_t k = down_start_[m]; k < down_start_[m + 1]; ++k)
        {
            const auto& lw = down_[k];
            const cplx* src = in.data() + std::size_t(lw.offset) * blk;
            cplx* side = lw.left ? left : right;
            for(std::size_t i = 0; i < blk; ++i) side[i] += lw.coefficient * src[i];
        }

        // acc = H rho + f L - rho H - R f (column-major, sparse H and f)
        std::fill(acc.begin(), acc.end(), cplx{});
        for(const auto& e : h_)
            for(int c = 0; c < d; ++c)
            {
                acc[c * d + e.row] += e.value * rho[c * d + e.col];
                acc[e.col * d + c] -= rho[e.row * d + c] * e.value;
            }
        for(const auto& e : f_)
            for(int c = 0; c < d; ++c)
            {
                acc[c * d + e.row] += e.value * left[c * d + e.col];
                acc[e.col * d + c] -= right[e.row * d + c] * e.value;
            }
        const cplx damp = damping_[m];
        for(std::size_t i = 0; i < blk; ++i) dst[i] = cplx(acc[i].imag(), -acc[i].real()) - damp * rho[i];
    }

    for(const auto& [target, source] : mirrored_)
    {
        const cplx* src = out.data() + std::size_t(source) * blk;
        cplx* dst = out.data() + std::size_t(target) * blk;
        for(int c = 0; c < d; ++c)
            for(int r = 0; r < d; ++r) dst[c * d + r] = std::conj(src[r * d + c]);
    }
}

void HeomRhs::operator()(std::span<const cplx> in, std::span<cplx> out) const
{
    if(in.size() != state_size() || out.size() != state_size())
        fail(ErrorCode::dimension_mismatch, "hierarchy state size does not match the right-hand side");
    switch(dim_)
    {
        case 2: apply<2>(in, out); break;
        case 4: apply<4>(in, out); break;
        default: apply<0>(in, out); break;
    }
}

HierarchyState heom_rhs(const HierarchyState& state, const Superoperators& ops)
{
    if(state.dimension != ops.dimension())
        fail(ErrorCode::dimension_mismatch, "state dimension does not match the superoperators");
    HeomRhs rhs(ops, state.indices);
    HierarchyState d;
    d.indices = state.indices;
    d.dimension = state.dimension;
    d.time = state.time;
    d.data.assign(state.data.size(), cplx{});
    rhs(state.data, d.data);
    return d;
}

}  // namespace heomkit
