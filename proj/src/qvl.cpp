#include "ehlearn/qvl.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ehlearn/rng.hpp"
#include "ehlearn/solver.hpp"

namespace ehlearn {

std::vector<double> ProtocolConfig::times() const {
    if (n_times < 1 || t_max <= 0.0)
        throw std::invalid_argument("protocol: n_times >= 1 and t_max > 0 required");
    std::vector<double> out;
    for (int i = 1; i <= n_times; ++i) out.push_back(t_max * i / n_times);
    return out;
}

// ---------------------------------------------------------------------------
// cost evaluator
// ---------------------------------------------------------------------------

struct CostEvaluator::Impl {
    Impl(AnsatzSpec a, DensityMatrix r, ObservableSet o)
        : ansatz(std::move(a)), rho(std::move(r)), obs(std::move(o)) {}

    AnsatzSpec ansatz;
    DensityMatrix rho;
    ObservableSet obs;
    std::vector<double> times_with_zero;
    long shots_each = 1;
    NoiseModel noise = NoiseModel::None;
    std::uint64_t seed = 0;
    long iteration = 0;
    std::vector<MeasurementRecord> records;

    // gaussian mode: O and O^2 evaluated in one pass
    ObservableSet obs_with_squares;

    // projective mode: per-observable eigendecomposition, one piece per
    // charge block (or one global block if the observable mixes charges)
    struct ObsDecomp {
        struct Piece {
            std::vector<int> idx;
            Eigen::VectorXd evals;
            MatXcd evecs;
        };
        std::vector<Piece> pieces;
    };
    std::vector<ObsDecomp> decomps;

    double evaluate(const Eigen::VectorXd& g);
    Eigen::MatrixXd estimates(const Propagator& prop, Eigen::MatrixXd& truth);
};

CostEvaluator::CostEvaluator(AnsatzSpec ansatz, DensityMatrix rho, ObservableSet obs,
                             std::vector<double> times, long shots_per_eval,
                             NoiseModel noise, std::uint64_t seed) {
    ansatz.validate();
    obs.validate();
    if (ansatz.terms[0].basis() != rho.basis() || obs.ops[0].basis() != rho.basis())
        throw std::invalid_argument("cost: ansatz/state/observable basis mismatch");
    for (double t : times)
        if (t <= 0.0) throw std::invalid_argument("cost: observation times must be > 0");

    impl_ = std::make_unique<Impl>(std::move(ansatz), std::move(rho), std::move(obs));
    impl_->times_with_zero.push_back(0.0);
    for (double t : times) impl_->times_with_zero.push_back(t);
    const long points =
        static_cast<long>(impl_->obs.size() * impl_->times_with_zero.size());
    impl_->shots_each = std::max(1L, shots_per_eval / points);
    impl_->noise = noise;
    impl_->seed = seed;

    if (noise == NoiseModel::Gaussian) {
        impl_->obs_with_squares = impl_->obs;
        for (std::size_t k = 0; k < impl_->obs.size(); ++k) {
            const auto& o = impl_->obs.ops[k];
            impl_->obs_with_squares.labels.push_back(impl_->obs.labels[k] + "^2");
            impl_->obs_with_squares.ops.push_back(LocalOperator(
                o.basis(), SpMat((o.matrix() * o.matrix()).pruned(1e-15)), o.support(),
                false));
        }
    } else if (noise == NoiseModel::Projective) {
        const SectorBasis& basis = *impl_->rho.basis();
        const auto& blocks = basis.charge_blocks();
        std::vector<int> block_of(basis.dim());
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (int i : blocks[b].second) block_of[i] = static_cast<int>(b);
        for (const auto& o : impl_->obs.ops) {
            bool mixes = false;
            for (int k = 0; k < o.matrix().outerSize() && !mixes; ++k)
                for (SpMat::InnerIterator it(o.matrix(), k); it; ++it)
                    if (block_of[it.row()] != block_of[it.col()] &&
                        std::abs(it.value()) > 1e-12) {
                        mixes = true;
                        break;
                    }
            std::vector<std::vector<int>> parts;
            if (mixes) {
                parts.emplace_back(basis.dim());
                for (std::size_t i = 0; i < basis.dim(); ++i)
                    parts[0][i] = static_cast<int>(i);
            } else {
                for (const auto& [q, idx] : blocks) parts.push_back(idx);
            }
            Impl::ObsDecomp dec;
            MatXcd dense = o.dense();
            for (auto& idx : parts) {
                MatXcd sub(idx.size(), idx.size());
                for (std::size_t r = 0; r < idx.size(); ++r)
                    for (std::size_t c = 0; c < idx.size(); ++c)
                        sub(r, c) = dense(idx[r], idx[c]);
                Eigen::SelfAdjointEigenSolver<MatXcd> es(sub);
                dec.pieces.push_back({std::move(idx), es.eigenvalues(), es.eigenvectors()});
            }
            impl_->decomps.push_back(std::move(dec));
        }
    }
}

CostEvaluator::~CostEvaluator() = default;
CostEvaluator::CostEvaluator(CostEvaluator&&) noexcept = default;

Eigen::MatrixXd CostEvaluator::Impl::estimates(const Propagator& prop,
                                               Eigen::MatrixXd& truth) {
    const std::size_t nt = times_with_zero.size();
    const std::size_t m = obs.size();
    Eigen::MatrixXd est(nt, m);

    if (noise == NoiseModel::None) {
        truth = prop.expectations(rho, obs, times_with_zero);
        est = truth;
    } else if (noise == NoiseModel::Gaussian) {
        Eigen::MatrixXd both = prop.expectations(rho, obs_with_squares, times_with_zero);
        truth = both.leftCols(m);
        for (std::size_t ti = 0; ti < nt; ++ti)
            for (std::size_t k = 0; k < m; ++k) {
                const double var =
                    std::max(0.0, both(ti, m + k) - truth(ti, k) * truth(ti, k));
                Rng rng(mix_seed(mix_seed(seed, iteration),
                                 k * 1024 + ti));
                est(ti, k) = truth(ti, k) + rng.normal() * std::sqrt(var / shots_each);
            }
    } else {
        truth.resize(nt, m);
        for (std::size_t ti = 0; ti < nt; ++ti) {
            DensityMatrix rho_t = prop.evolve(rho, times_with_zero[ti]);
            for (std::size_t k = 0; k < m; ++k) {
                std::vector<double> w, p;
                for (const auto& piece : decomps[k].pieces) {
                    MatXcd sub(piece.idx.size(), piece.idx.size());
                    for (std::size_t r = 0; r < piece.idx.size(); ++r)
                        for (std::size_t c = 0; c < piece.idx.size(); ++c)
                            sub(r, c) = rho_t.matrix()(piece.idx[r], piece.idx[c]);
                    Eigen::VectorXd probs = ((sub * piece.evecs).cwiseProduct(
                                                 piece.evecs.conjugate()))
                                                .colwise()
                                                .sum()
                                                .real();
                    for (int i = 0; i < probs.size(); ++i) {
                        w.push_back(piece.evals(i));
                        p.push_back(std::max(0.0, probs(i)));
                    }
                }
                double norm = 0.0, mean = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    norm += p[i];
                    mean += p[i] * w[i];
                }
                truth(ti, k) = mean / norm;
                std::vector<double> cum(p.size());
                double run = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) cum[i] = (run += p[i]);
                Rng rng(mix_seed(mix_seed(seed, iteration), k * 1024 + ti));
                double sum = 0.0;
                for (long s = 0; s < shots_each; ++s) {
                    const double u = rng.uniform() * run;
                    const std::size_t j =
                        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
                    sum += w[std::min(j, p.size() - 1)];
                }
                est(ti, k) = sum / shots_each;
            }
        }
    }
    return est;
}

double CostEvaluator::Impl::evaluate(const Eigen::VectorXd& g) {
    Propagator prop(deformed_hamiltonian(ansatz.terms, g));
    Eigen::MatrixXd truth;
    Eigen::MatrixXd est = estimates(prop, truth);

    records.clear();
    for (std::size_t ti = 0; ti < times_with_zero.size(); ++ti)
        for (std::size_t k = 0; k < obs.size(); ++k)
            records.push_back({times_with_zero[ti], obs.labels[k], truth(ti, k),
                               est(ti, k), shots_each});

    double cost = 0.0;
    for (std::size_t ti = 1; ti < times_with_zero.size(); ++ti)
        for (std::size_t k = 0; k < obs.size(); ++k) {
            const double d = est(ti, k) - est(0, k);
            cost += d * d;
        }
    ++iteration;
    return cost;
}

double CostEvaluator::cost(const Eigen::VectorXd& g_full) {
    if (static_cast<std::size_t>(g_full.size()) != impl_->ansatz.size())
        throw std::invalid_argument("cost: parameter count mismatch");
    return impl_->evaluate(g_full);
}

const std::vector<MeasurementRecord>& CostEvaluator::last_records() const {
    return impl_->records;
}
long CostEvaluator::evaluations() const { return impl_->iteration; }
long CostEvaluator::shots_per_measurement() const { return impl_->shots_each; }
const AnsatzSpec& CostEvaluator::ansatz() const { return impl_->ansatz; }

std::pair<double, std::vector<MeasurementRecord>> cost_function(
    const AnsatzSpec& ansatz, const Eigen::VectorXd& g, const DensityMatrix& rho,
    const ObservableSet& obs, const std::vector<double>& times, long shots_per_eval,
    NoiseModel noise, std::uint64_t seed) {
    CostEvaluator ev(ansatz, rho, obs, times, shots_per_eval, noise, seed);
    const double c = ev.cost(g);
    return {c, ev.last_records()};
}

// ---------------------------------------------------------------------------
// protocol runner
// ---------------------------------------------------------------------------

ObservableSet default_hubbard_observables(const BasisPtr& sub_basis) {
    ObservableSet obs;
    for (int j = 0; j < sub_basis->n_sites(); ++j) {
        obs.labels.push_back("docc" + std::to_string(j));
        obs.ops.push_back(double_occupancy(sub_basis, j));
    }
    for (const Edge& e : sub_basis->lattice().edges()) {
        for (Spin s : {Spin::Up, Spin::Down}) {
            obs.labels.push_back("tun" + std::to_string(e.a) + "_" +
                                 std::to_string(e.b) + (s == Spin::Up ? "_up" : "_dn"));
            obs.ops.push_back(fermion_hopping(sub_basis, e.a, e.b, s));
        }
    }
    obs.validate();
    return obs;
}

ObservableSet default_heisenberg_observables(const BasisPtr& sub_basis) {
    ObservableSet obs;
    for (const Edge& e : sub_basis->lattice().edges()) {
        obs.labels.push_back("bond" + std::to_string(e.a) + "_" + std::to_string(e.b));
        obs.ops.push_back(heisenberg_bond(sub_basis, e.a, e.b));
    }
    for (int j = 0; j < sub_basis->n_sites(); ++j) {
        obs.labels.push_back("sz" + std::to_string(j));
        obs.ops.push_back(sigma(sub_basis, j, Axis::Z));
    }
    obs.validate();
    return obs;
}

namespace {

Eigen::VectorXd embed_full(const AnsatzSpec& ansatz, const Eigen::VectorXd& g_free) {
    Eigen::VectorXd g(ansatz.size());
    int f = 0;
    for (std::size_t j = 0; j < ansatz.size(); ++j)
        g(j) = static_cast<int>(j) == ansatz.fixed_index ? ansatz.fixed_value
                                                         : g_free(f++);
    return g;
}

}  // namespace

QvlResult run_qvl(const DensityMatrix& rho_A, const AnsatzSpec& ansatz,
                  const ObservableSet& obs, const ProtocolConfig& cfg) {
    ansatz.validate();
    obs.validate();

    QvlResult out;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        bool moves = false;
        for (const auto& term : ansatz.terms)
            if (commutator(obs.ops[k], term).norm_max() > 1e-12) {
                moves = true;
                break;
            }
        if (!moves)
            out.warnings.push_back("observable '" + obs.labels[k] +
                                   "' commutes with every ansatz term and carries no "
                                   "signal");
    }

    CostEvaluator evaluator(ansatz, rho_A, obs, cfg.times(), cfg.shots_per_eval,
                            cfg.noise, cfg.seed);

    std::vector<std::pair<double, double>> bounds;
    for (std::size_t j = 0; j < ansatz.size(); ++j)
        if (static_cast<int>(j) != ansatz.fixed_index)
            bounds.push_back(ansatz.bounds[j]);

    // random initial parameter vector inside the box
    Rng init_rng(mix_seed(cfg.seed, 0x1417ULL));
    Eigen::VectorXd g0(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i)
        g0(i) = bounds[i].first +
                init_rng.uniform() * (bounds[i].second - bounds[i].first);

    DirectOptions opt;
    opt.extra_points = {g0};
    opt.shots_per_eval = cfg.shots_per_eval;
    auto [free_opt, trace] = direct_optimize(
        [&](const Eigen::VectorXd& g_free) {
            return evaluator.cost(embed_full(ansatz, g_free));
        },
        bounds, cfg.evals(), opt);

    out.g_opt = embed_full(ansatz, free_opt);
    out.final_cost = trace.costs[trace.best_index()];
    out.shots_used = static_cast<long>(trace.size()) * cfg.shots_per_eval;
    out.trace = std::move(trace);
    return out;
}

QvlResult run_qvl(const LocalOperator& h_full, const std::vector<int>& subsystem,
                  const AnsatzSpec& ansatz, const ObservableSet& obs,
                  const ProtocolConfig& cfg) {
    auto gs = ground_state(h_full, static_cast<unsigned>(cfg.seed));
    auto rho = partial_trace(gs.psi, *h_full.basis(), subsystem);
    return run_qvl(rho, ansatz, obs, cfg);
}

// ---------------------------------------------------------------------------
// learnability
// ---------------------------------------------------------------------------

LearnabilityReport check_learnability(
    const AnsatzSpec& ansatz,
    const std::vector<std::pair<std::string, LocalOperator>>& symmetry_generators) {
    ansatz.validate();
    const std::size_t dim = ansatz.terms[0].dim();
    if (dim * dim > 10'000'000)
        throw std::invalid_argument(
            "learnability: basis too large for dense vectorization; run the check "
            "on a smaller proxy lattice");

    LearnabilityReport rep;
    const int n = static_cast<int>(ansatz.size());
    std::vector<MatXcd> comms;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            auto c = commutator(ansatz.terms[j], ansatz.terms[k]);
            if (c.norm_max() > 1e-10) {
                rep.nonzero_pairs.push_back({j, k});
                comms.push_back(c.dense());
            }
        }

    if (!comms.empty()) {
        MatXcd stacked(comms.size(), dim * dim);
        for (std::size_t r = 0; r < comms.size(); ++r)
            stacked.row(r) = comms[r].reshaped().transpose();
        Eigen::JacobiSVD<MatXcd> svd(stacked);
        const auto& s = svd.singularValues();
        rep.rank = static_cast<int>((s.array() > 1e-8 * s(0)).count());
    }
    rep.independent = rep.rank == static_cast<int>(rep.nonzero_pairs.size()) &&
                      !rep.nonzero_pairs.empty();

    // connected components of the commutator graph
    std::vector<std::vector<int>> adj(n);
    for (const auto& [j, k] : rep.nonzero_pairs) {
        adj[j].push_back(k);
        adj[k].push_back(j);
    }
    std::vector<int> comp(n, -1);
    for (int start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        comp[start] = static_cast<int>(rep.components.size());
        rep.components.push_back({start});
        std::queue<int> q;
        q.push(start);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int w : adj[v])
                if (comp[w] < 0) {
                    comp[w] = comp[v];
                    rep.components[comp[v]].push_back(w);
                    q.push(w);
                }
        }
    }
    for (auto& c : rep.components) std::sort(c.begin(), c.end());
    rep.connected = rep.components.size() == 1;

    rep.undetermined_constants = {"beta", "c"};
    for (const auto& [name, gen] : symmetry_generators) {
        bool commutes = true;
        for (const auto& term : ansatz.terms)
            if (commutator(gen, term).norm_max() > 1e-10) {
                commutes = false;
                break;
            }
        if (commutes) rep.undetermined_constants.push_back(name);
    }
    return rep;
}

}  // namespace ehlearn
