#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerlab/error.hpp"
#include "eulerlab/model/domain.hpp"
#include "eulerlab/model/partition.hpp"
#include "eulerlab/model/problem.hpp"
#include "eulerlab/rng/normal.hpp"
#include "eulerlab/rng/philox.hpp"

namespace eulerlab {

// Fine increments are rounded to integer multiples of 2^-40 so that every
// coarse increment is an exact integer sum, independent of summation order.
inline constexpr double kTick = 0x1.0p-40;

/// Positions of a target grid inside a fine grid, computed once per grid pair.
struct GridEmbedding {
    std::vector<std::size_t> positions;  // fine index of each target point
};

inline GridEmbedding embed(const Grid& fine, const Grid& target) {
    GridEmbedding e;
    e.positions.reserve(target.size());
    for (double t : target.times) {
        auto pos = fine.find(t);
        if (!pos)
            throw RefinementError("target grid point " + std::to_string(t) +
                                  " is not on the fine grid; rebuild the noise plan with this grid included");
        e.positions.push_back(*pos);
    }
    return e;
}

/// Union of the simulation grids for `ns`, restricted to [0, horizon], plus
/// optional extra grids (the reference grid, evaluation times).
inline std::shared_ptr<const Grid> make_fine_grid(const PartitionFamily& partition, const std::vector<Index>& ns,
                                                  const std::vector<Grid>& extra = {}) {
    std::vector<Grid> grids;
    for (Index n : ns) grids.push_back(partition.simulation_grid(n));
    for (const auto& g : extra) grids.push_back(restrict_grid(g, partition.horizon()));
    std::vector<const Grid*> ptrs;
    for (const auto& g : grids) ptrs.push_back(&g);
    return std::make_shared<const Grid>(grid_union(ptrs));
}

/// Brownian increments of one path on the fine grid. The normal for fine
/// step j, component c is Φ^{-1}(U) with U keyed by (seed, path, j, c).
class NoisePlan {
public:
    NoisePlan(std::uint64_t seed, std::uint64_t path_index, std::shared_ptr<const Grid> fine, int dim_noise)
        : seed_(seed), path_(path_index), fine_(std::move(fine)), d1_(dim_noise) {
        if (!fine_ || fine_->size() < 2) throw ConfigError("noise plan needs a fine grid with at least one step");
        if (d1_ <= 0) throw ConfigError("noise dimension must be positive");
        const std::size_t steps = fine_->steps();
        ticks_.resize(steps * static_cast<std::size_t>(d1_));
        for (std::size_t j = 0; j < steps; ++j) {
            const double sd = std::sqrt(fine_->times[j + 1] - fine_->times[j]);
            for (int c = 0; c < d1_; ++c) {
                const double z = rng::normal_quantile(
                    rng::uniform(seed_, rng::Stream::increments, path_, j, static_cast<std::uint32_t>(c)));
                ticks_[j * d1_ + c] = std::llround(z * sd / kTick);
            }
        }
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t path_index() const { return path_; }
    const Grid& fine_grid() const { return *fine_; }
    const std::shared_ptr<const Grid>& fine_grid_ptr() const { return fine_; }
    int dim_noise() const { return d1_; }

    /// Increment over fine step j, component c.
    double fine_increment(std::size_t j, int c) const { return static_cast<double>(ticks_[j * d1_ + c]) * kTick; }

    /// w(t_fine[j]) component c; exact.
    double wiener_at(std::size_t j, int c) const {
        std::int64_t s = 0;
        for (std::size_t i = 0; i < j; ++i) s += ticks_[i * d1_ + c];
        return static_cast<double>(s) * kTick;
    }

    /// Running Wiener path at every fine point, d1 x size.
    Eigen::MatrixXd wiener_path() const {
        Eigen::MatrixXd w(d1_, fine_->size());
        std::vector<std::int64_t> acc(static_cast<std::size_t>(d1_), 0);
        for (std::size_t j = 0; j < fine_->size(); ++j) {
            for (int c = 0; c < d1_; ++c) {
                w(c, static_cast<Eigen::Index>(j)) = static_cast<double>(acc[c]) * kTick;
                if (j + 1 < fine_->size()) acc[c] += ticks_[j * d1_ + c];
            }
        }
        return w;
    }

    /// Increments over the target grid's steps, d1 x steps. Each is the exact
    /// sum of the fine increments inside the step.
    Eigen::MatrixXd increments(const GridEmbedding& e) const {
        const std::size_t steps = e.positions.empty() ? 0 : e.positions.size() - 1;
        Eigen::MatrixXd out(d1_, static_cast<Eigen::Index>(steps));
        for (std::size_t i = 0; i < steps; ++i)
            for (int c = 0; c < d1_; ++c) {
                std::int64_t s = 0;
                for (std::size_t j = e.positions[i]; j < e.positions[i + 1]; ++j) s += ticks_[j * d1_ + c];
                out(c, static_cast<Eigen::Index>(i)) = static_cast<double>(s) * kTick;
            }
        return out;
    }

    Eigen::MatrixXd wiener_increments(const Grid& target) const { return increments(embed(*fine_, target)); }

    /// Little-endian binary dump: "EULNOISE", seed, path, grid hash, d1,
    /// steps, then steps*d1 float64 increments (step-major).
    void dump(std::ostream& os) const {
        os.write("EULNOISE", 8);
        put_u64(os, seed_);
        put_u64(os, path_);
        put_u64(os, fine_->hash());
        put_u64(os, static_cast<std::uint64_t>(d1_));
        put_u64(os, static_cast<std::uint64_t>(fine_->steps()));
        for (std::size_t j = 0; j < fine_->steps(); ++j)
            for (int c = 0; c < d1_; ++c) put_u64(os, std::bit_cast<std::uint64_t>(fine_increment(j, c)));
        if (!os) throw IoError("failed writing noise dump");
    }

private:
    static void put_u64(std::ostream& os, std::uint64_t v) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        os.write(b, 8);
    }

    std::uint64_t seed_;
    std::uint64_t path_;
    std::shared_ptr<const Grid> fine_;
    int d1_;
    std::vector<std::int64_t> ticks_;
};

namespace detail {

inline bool law_support_in_domain(const InitialLaw& law, const DomainChain& dom) {
    switch (law.kind) {
        case InitialLaw::Kind::point: return dom.contains(law.point);
        case InitialLaw::Kind::discrete:
            for (const auto& a : law.atoms)
                if (!dom.contains(a)) return false;
            return true;
        case InitialLaw::Kind::uniform_box: {
            const int d = static_cast<int>(law.lo.size());
            if (dom.kind() == DomainChain::Kind::ball) {
                double s = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double c = dom.center()[i];
                    const double m = std::max(std::fabs(law.lo[i] - c), std::fabs(law.hi[i] - c));
                    s += m * m;
                }
                return std::sqrt(s) < dom.radius();
            }
            // axis-aligned D: the two extreme corners decide
            return dom.contains(law.lo) && dom.contains(law.hi);
        }
        case InitialLaw::Kind::gaussian: return dom.kind() == DomainChain::Kind::whole_space;
    }
    return false;
}

}  // namespace detail

/// Checks condition (iii): the law's support lies in D.
inline void validate_initial_law(const InitialLaw& law, const std::optional<DomainChain>& domain) {
    switch (law.kind) {
        case InitialLaw::Kind::uniform_box:
            if (law.lo.size() != law.hi.size()) throw ConfigError("uniform initial law bounds differ in size");
            for (std::size_t i = 0; i < law.lo.size(); ++i)
                if (!(law.lo[i] <= law.hi[i])) throw ConfigError("uniform initial law needs lo <= hi");
            break;
        case InitialLaw::Kind::gaussian:
            if (law.cov.size() != law.mean.size()) throw ConfigError("gaussian initial covariance has wrong shape");
            break;
        case InitialLaw::Kind::discrete:
            if (law.atoms.empty() || law.atoms.size() != law.weights.size())
                throw ConfigError("discrete initial law needs one weight per atom");
            for (double w : law.weights)
                if (!(w >= 0)) throw ConfigError("discrete initial weights must be nonnegative");
            break;
        case InitialLaw::Kind::point: break;
    }
    if (domain && !detail::law_support_in_domain(law, *domain))
        throw ConfigError("initial law is not supported in the domain D (P(xi in D) = 1 fails)");
}

/// Draws ξ for one path from the initial substream. Point masses are returned
/// exactly.
inline std::vector<double> sample_initial(const InitialLaw& law, std::uint64_t seed, std::uint64_t path_index,
                                          const std::optional<DomainChain>& domain = std::nullopt) {
    validate_initial_law(law, domain);
    auto u = [&](std::uint32_t c) { return rng::uniform(seed, rng::Stream::initial, path_index, 0, c); };
    switch (law.kind) {
        case InitialLaw::Kind::point: return law.point;
        case InitialLaw::Kind::uniform_box: {
            std::vector<double> x(law.lo.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = law.lo[i] + u(static_cast<std::uint32_t>(i)) * (law.hi[i] - law.lo[i]);
            return x;
        }
        case InitialLaw::Kind::gaussian: {
            const auto d = static_cast<Eigen::Index>(law.mean.size());
            Eigen::MatrixXd cov(d, d);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) cov(i, j) = law.cov[i][j];
            Eigen::LLT<Eigen::MatrixXd> llt(cov);
            if (llt.info() != Eigen::Success) throw ConfigError("gaussian initial covariance is not positive definite");
            Eigen::VectorXd z(d);
            for (Eigen::Index i = 0; i < d; ++i) z(i) = rng::normal_quantile(u(static_cast<std::uint32_t>(i)));
            Eigen::VectorXd x = llt.matrixL() * z;
            std::vector<double> out(law.mean);
            for (Eigen::Index i = 0; i < d; ++i) out[i] += x(i);
            return out;
        }
        case InitialLaw::Kind::discrete: {
            double total = 0.0;
            for (double w : law.weights) total += w;
            double r = u(0) * total;
            for (std::size_t i = 0; i < law.atoms.size(); ++i) {
                r -= law.weights[i];
                if (r < 0) return law.atoms[i];
            }
            return law.atoms.back();
        }
    }
    return law.point;
}

}  // namespace eulerlab
