// trajectories.hpp: jump unraveling of the Lindblad equation on conditioned
// density matrices, with seedable per-trajectory streams and ensemble averaging.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qts/bases.hpp"
#include "qts/models.hpp"
#include "qts/numkit.hpp"

namespace qts {

/// Name of the pseudo-random generator recorded with every trajectory.
inline constexpr const char* kGeneratorName = "mt19937_64/splitmix64(baseSeed,index)";

/// Independent per-trajectory seed: a SplitMix64 hash of (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

struct JumpEvent {
    double time;
    std::size_t channel;
};

struct TrajectoryRecord {
    std::vector<double> grid;
    std::vector<ComplexMatrix> states; // conditioned state at each grid time
    std::vector<JumpEvent> jumps;
    std::uint64_t seed = 0;
    std::string generator = kGeneratorName;
};

struct NoJumpResult {
    ComplexMatrix state;
    double jump_probability;
};

/// Null-measurement update over dt. The conditioned state is propagated with
/// exp(-i H_eff dt), H_eff = H - (i/2) sum_k L_k^dagger L_k, and renormalized.
/// Throws std::invalid_argument when dt * sum_k Tr[L_k rho L_k^dagger] > 0.01.
NoJumpResult no_jump_step(const ComplexMatrix& rho, const Model& model, double dt);

/// L rho L^dagger / Tr[L rho L^dagger]; throws when the channel cannot fire.
ComplexMatrix jump(const ComplexMatrix& rho, const ComplexMatrix& l);

/// Observable layout used for CSV export and ensemble statistics: populations
/// rho_ii, then Re/Im of rho_ij for i > j.
std::vector<std::string> observable_names(std::size_t dim);
void observables_into(const ComplexMatrix& rho, std::vector<double>& out);
ComplexMatrix state_from_observables(std::span<const double> obs, std::size_t dim);

/// Samples trajectories of one model in one basis. Substeps are chosen so that
/// the total jump probability per substep stays below max_step_probability.
class TrajectorySampler {
public:
    TrajectorySampler(const Model& model, const BasisTransform& basis,
                      double max_step_probability = 1e-3);

    /// rho0 is expressed in the sampler's basis.
    TrajectoryRecord sample(const ComplexMatrix& rho0, const std::vector<double>& grid,
                            std::uint64_t seed) const;

    /// Same dynamics, recording only observables at grid times (flattened
    /// grid-major) and the number of jumps.
    std::size_t sample_observables(const ComplexMatrix& rho0, const std::vector<double>& grid,
                                   std::uint64_t seed, std::vector<double>& obs_out,
                                   std::vector<JumpEvent>* jumps = nullptr) const;

    const Model& model() const { return model_; }
    double max_substep() const { return max_dt_; }

private:
    template <class Visitor>
    void run(const ComplexMatrix& rho0, const std::vector<double>& grid, std::uint64_t seed,
             Visitor&& at_grid, std::vector<JumpEvent>* jumps) const;

    const ComplexMatrix& no_jump_propagator(double dt) const;

    Model model_; // operators expressed in the sampling basis
    std::vector<ComplexMatrix> decay_; // L_k^dagger L_k
    ComplexMatrix effective_;          // -i H_eff
    double max_dt_;
    mutable std::mutex cache_mutex_;
    mutable std::map<double, ComplexMatrix> cache_;
};

TrajectoryRecord sample_trajectory(const Model& model, const BasisTransform& basis,
                                   const ComplexMatrix& rho0, const std::vector<double>& grid,
                                   std::uint64_t seed);

struct EnsembleSummary {
    std::vector<double> grid;
    std::vector<std::string> names;          // observable names
    std::vector<std::vector<double>> mean;   // [grid][observable]
    std::vector<std::vector<double>> std_error; // [grid][observable]
    std::vector<ComplexMatrix> mean_states;
    std::vector<std::size_t> jump_counts;    // per trajectory
    std::size_t count = 0;
    std::uint64_t base_seed = 0;
    std::string generator = kGeneratorName;
};

/// Averages `count` trajectories with seeds derive_seed(base_seed, i). The
/// result does not depend on `workers`.
EnsembleSummary ensemble_average(const Model& model, const BasisTransform& basis,
                                 const ComplexMatrix& rho0, const std::vector<double>& grid,
                                 std::size_t count, std::uint64_t base_seed, std::size_t workers = 1);

struct CorrelationEstimate {
    std::vector<double> lags;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::size_t count = 0;
};

/// Trajectory estimate of <sigma_z(t) sigma_z(0)> in the decoherence basis of
/// the two-level model, from the stationary (maximally mixed) state unraveled
/// into sigma_z eigenstates.
CorrelationEstimate sigma_z_correlation(const Model& model, const std::vector<double>& lags,
                                        std::size_t count, std::uint64_t base_seed,
                                        std::size_t workers = 1);

/// Runs fn(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

} // namespace qts
