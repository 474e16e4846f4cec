#include "qts/trajectories.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qts/master.hpp"

namespace qts {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    // Re Tr[a b]
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += (a(i, j) * b(j, i)).real();
    return s;
}

void normalize_hermitian(ComplexMatrix& rho) {
    const std::size_t d = rho.rows();
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += rho(i, i).real();
    const double inv = 1.0 / tr;
    for (std::size_t i = 0; i < d; ++i) {
        rho(i, i) = rho(i, i).real() * inv;
        for (std::size_t j = 0; j < i; ++j) {
            const cplx z = 0.5 * (rho(i, j) + std::conj(rho(j, i))) * inv;
            rho(i, j) = z;
            rho(j, i) = std::conj(z);
        }
    }
}

ComplexMatrix effective_generator(const Model& model) {
    // -i H_eff = -i H - (1/2) sum_k L_k^dagger L_k
    ComplexMatrix g = model.hamiltonian * cplx(0.0, -1.0);
    for (const auto& l : model.collapse_ops) {
        ComplexMatrix ldl = l.adjoint() * l;
        ldl *= 0.5;
        g -= ldl;
    }
    return g;
}

double total_rate_bound(const Model& model) {
    double rate = 0.0;
    for (const auto& l : model.collapse_ops) {
        const auto ev = hermitian_eigenvalues(l.adjoint() * l);
        rate += std::max(0.0, ev.back());
    }
    return rate;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

NoJumpResult no_jump_step(const ComplexMatrix& rho, const Model& model, double dt) {
    if (rho.rows() != model.dimension || rho.cols() != model.dimension) {
        throw std::invalid_argument("no_jump_step: state dimension mismatch");
    }
    if (!(dt >= 0.0)) throw std::invalid_argument("no_jump_step: dt must be non-negative");
    double weight = 0.0;
    for (const auto& l : model.collapse_ops) weight += real_trace_product(l.adjoint() * l, rho);
    const double p = dt * weight;
    if (p > 0.01) {
        std::ostringstream os;
        os << "no_jump_step: jump probability " << p << " exceeds 0.01; use dt <= "
           << 0.01 / weight;
        throw std::invalid_argument(os.str());
    }
    if (dt == 0.0) return {rho, 0.0};
    const ComplexMatrix k = expm(effective_generator(model) * cplx(dt, 0.0));
    ComplexMatrix out = k * rho * k.adjoint();
    normalize_hermitian(out);
    return {out, p};
}

ComplexMatrix jump(const ComplexMatrix& rho, const ComplexMatrix& l) {
    if (rho.rows() != l.cols() || !l.is_square()) throw std::invalid_argument("jump: dimension mismatch");
    ComplexMatrix out = l * rho * l.adjoint();
    const double w = out.trace().real();
    if (!(w > 0.0)) throw std::invalid_argument("jump: channel has zero weight in this state");
    normalize_hermitian(out);
    return out;
}

std::vector<std::string> observable_names(std::size_t dim) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < dim; ++i) names.push_back("rho_" + std::to_string(i) + std::to_string(i));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const std::string base = "rho_" + std::to_string(i) + std::to_string(j);
            names.push_back(base + "_re");
            names.push_back(base + "_im");
        }
    return names;
}

void observables_into(const ComplexMatrix& rho, std::vector<double>& out) {
    const std::size_t d = rho.rows();
    out.clear();
    for (std::size_t i = 0; i < d; ++i) out.push_back(rho(i, i).real());
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            out.push_back(rho(i, j).real());
            out.push_back(rho(i, j).imag());
        }
}

ComplexMatrix state_from_observables(std::span<const double> obs, std::size_t dim) {
    if (obs.size() != dim * dim) throw std::invalid_argument("state_from_observables: size mismatch");
    ComplexMatrix rho(dim, dim);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < dim; ++i) rho(i, i) = obs[pos++];
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            rho(i, j) = cplx(obs[pos], obs[pos + 1]);
            rho(j, i) = cplx(obs[pos], -obs[pos + 1]);
            pos += 2;
        }
    return rho;
}

TrajectorySampler::TrajectorySampler(const Model& model, const BasisTransform& basis,
                                     double max_step_probability)
    : model_(model_in_basis(model, basis)) {
    for (const auto& l : model_.collapse_ops) decay_.push_back(l.adjoint() * l);
    effective_ = effective_generator(model_);
    const double rate = total_rate_bound(model_);
    max_dt_ = rate > 0.0 ? max_step_probability / rate : std::numeric_limits<double>::infinity();
}

const ComplexMatrix& TrajectorySampler::no_jump_propagator(double dt) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(dt);
    if (it == cache_.end()) it = cache_.emplace(dt, expm(effective_ * cplx(dt, 0.0))).first;
    return it->second;
}

template <class Visitor>
void TrajectorySampler::run(const ComplexMatrix& rho0, const std::vector<double>& grid,
                            std::uint64_t seed, Visitor&& at_grid,
                            std::vector<JumpEvent>* jumps) const {
    const std::size_t d = model_.dimension;
    if (rho0.rows() != d || rho0.cols() != d) throw std::invalid_argument("trajectory: state dimension mismatch");
    std::mt19937_64 gen(seed);
    ComplexMatrix rho = rho0;
    ComplexMatrix tmp(d, d), next(d, d);
    std::vector<double> weights(decay_.size());
    double t = 0.0;

    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double target = grid[g];
        if (!(target >= t)) throw std::invalid_argument("trajectory: grid must be ascending and non-negative");
        bool jumped = false;
        const double span = target - t;
        if (span > 0.0) {
            const auto steps = static_cast<std::size_t>(
                std::isfinite(max_dt_) ? std::max(1.0, std::ceil(span / max_dt_)) : 1.0);
            const double dt = span / static_cast<double>(steps);
            const ComplexMatrix& k = no_jump_propagator(dt);
            for (std::size_t s = 0; s < steps; ++s) {
                double total = 0.0;
                for (std::size_t c = 0; c < decay_.size(); ++c) {
                    weights[c] = std::max(0.0, real_trace_product(decay_[c], rho));
                    total += weights[c];
                }
                const double u = uniform01(gen);
                if (u < dt * total) {
                    // u / dt is uniform on [0, total): reuse it to pick the channel.
                    const double pick = u / dt;
                    std::size_t c = 0;
                    double acc = weights[0];
                    while (c + 1 < weights.size() && (pick >= acc || weights[c] == 0.0)) {
                        ++c;
                        acc += weights[c];
                    }
                    const ComplexMatrix& l = model_.collapse_ops[c];
                    multiply_into(l, rho, tmp);
                    multiply_adjoint_into(tmp, l, next);
                    std::swap(rho, next);
                    normalize_hermitian(rho);
                    const double when = (s + 1 == steps) ? target : t + dt * static_cast<double>(s + 1);
                    if (jumps) jumps->push_back({when, c});
                    jumped = true;
                } else {
                    multiply_into(k, rho, tmp);
                    multiply_adjoint_into(tmp, k, next);
                    std::swap(rho, next);
                    normalize_hermitian(rho);
                }
            }
            t = target;
        }
        at_grid(g, rho, jumped);
    }
}

TrajectoryRecord TrajectorySampler::sample(const ComplexMatrix& rho0, const std::vector<double>& grid,
                                           std::uint64_t seed) const {
    TrajectoryRecord rec;
    rec.grid = grid;
    rec.seed = seed;
    rec.states.reserve(grid.size());
    run(rho0, grid, seed, [&](std::size_t, const ComplexMatrix& rho, bool) { rec.states.push_back(rho); },
        &rec.jumps);
    return rec;
}

std::size_t TrajectorySampler::sample_observables(const ComplexMatrix& rho0,
                                                  const std::vector<double>& grid, std::uint64_t seed,
                                                  std::vector<double>& obs_out,
                                                  std::vector<JumpEvent>* jumps) const {
    const std::size_t d = model_.dimension;
    const std::size_t per = d * d;
    obs_out.assign(grid.size() * per, 0.0);
    std::vector<double> buf;
    std::vector<JumpEvent> local;
    std::vector<JumpEvent>* log = jumps ? jumps : &local;
    const std::size_t before = log->size();
    run(rho0, grid, seed,
        [&](std::size_t g, const ComplexMatrix& rho, bool) {
            observables_into(rho, buf);
            std::copy(buf.begin(), buf.end(), obs_out.begin() + static_cast<std::ptrdiff_t>(g * per));
        },
        log);
    return log->size() - before;
}

TrajectoryRecord sample_trajectory(const Model& model, const BasisTransform& basis,
                                   const ComplexMatrix& rho0, const std::vector<double>& grid,
                                   std::uint64_t seed) {
    validate_state(rho0, 1e-10);
    return TrajectorySampler(model, basis).sample(rho0, grid, seed);
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

void reduce_in_order(const std::vector<std::vector<double>>& samples, std::size_t n_grid,
                     std::size_t per, std::vector<std::vector<double>>& mean,
                     std::vector<std::vector<double>>& se) {
    const std::size_t n = samples.size();
    mean.assign(n_grid, std::vector<double>(per, 0.0));
    se.assign(n_grid, std::vector<double>(per, 0.0));
    for (std::size_t g = 0; g < n_grid; ++g)
        for (std::size_t o = 0; o < per; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += samples[i][g * per + o];
            const double m = s / static_cast<double>(n);
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = samples[i][g * per + o] - m;
                v += x * x;
            }
            mean[g][o] = m;
            se[g][o] = n > 1 ? std::sqrt(v / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        }
}

} // namespace

EnsembleSummary ensemble_average(const Model& model, const BasisTransform& basis,
                                 const ComplexMatrix& rho0, const std::vector<double>& grid,
                                 std::size_t count, std::uint64_t base_seed, std::size_t workers) {
    if (count == 0) throw std::invalid_argument("ensemble_average: count must be at least 1");
    validate_state(rho0, 1e-10);
    const TrajectorySampler sampler(model, basis);
    const std::size_t d = model.dimension;

    std::vector<std::vector<double>> samples(count);
    std::vector<std::size_t> jumps(count);
    parallel_for(count, workers, [&](std::size_t i) {
        jumps[i] = sampler.sample_observables(rho0, grid, derive_seed(base_seed, i), samples[i]);
    });

    EnsembleSummary out;
    out.grid = grid;
    out.names = observable_names(d);
    out.count = count;
    out.base_seed = base_seed;
    out.jump_counts = std::move(jumps);
    reduce_in_order(samples, grid.size(), d * d, out.mean, out.std_error);
    for (const auto& m : out.mean) out.mean_states.push_back(state_from_observables(m, d));
    return out;
}

CorrelationEstimate sigma_z_correlation(const Model& model, const std::vector<double>& lags,
                                        std::size_t count, std::uint64_t base_seed,
                                        std::size_t workers) {
    if (model.kind != ModelKind::TwoLevel) {
        throw std::invalid_argument("sigma_z_correlation: defined for the two-level model");
    }
    if (count == 0) throw std::invalid_argument("sigma_z_correlation: count must be at least 1");
    const TrajectorySampler sampler(model, basis_for(model, BasisKind::Decoherence));

    std::vector<std::vector<double>> samples(count);
    parallel_for(count, workers, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(base_seed, i);
        // I/2 = (|psi_-><psi_-| + |psi_+><psi_+|)/2, sampled with an independent bit.
        const bool minus = (splitmix64(seed ^ 0x5bd1e9955bd1e995ULL) & 1ULL) == 0;
        ComplexMatrix rho0(2, 2);
        rho0(minus ? 0 : 1, minus ? 0 : 1) = 1.0;
        const double sz0 = minus ? 1.0 : -1.0;
        std::vector<double> obs;
        sampler.sample_observables(rho0, lags, seed, obs);
        samples[i].resize(lags.size());
        for (std::size_t g = 0; g < lags.size(); ++g)
            samples[i][g] = sz0 * (obs[g * 4 + 0] - obs[g * 4 + 1]);
    });

    std::vector<std::vector<double>> mean, se;
    reduce_in_order(samples, lags.size(), 1, mean, se);
    CorrelationEstimate out;
    out.lags = lags;
    out.count = count;
    for (std::size_t g = 0; g < lags.size(); ++g) {
        out.mean.push_back(mean[g][0]);
        out.std_error.push_back(se[g][0]);
    }
    return out;
}

} // namespace qts
