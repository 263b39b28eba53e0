#include "ehlearn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ehlearn/solver.hpp"

namespace ehlearn {

namespace {

double trace_product(const MatXcd& rho, const SpMat& h) {
    // Tr(rho h) = sum_{rc} h(r,c) rho(c,r)
    cd acc = 0.0;
    for (int k = 0; k < h.outerSize(); ++k)
        for (SpMat::InnerIterator it(h, k); it; ++it)
            acc += it.value() * rho(it.col(), it.row());
    return acc.real();
}

MatXcd sqrt_psd(const MatXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatXcd> es(m);
    Eigen::VectorXd p = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * p.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

double sum_sqrt_eigenvalues(const MatXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

/// Whether rho has support only inside the given index blocks.
bool block_compatible(const MatXcd& rho, const std::vector<SectorEigensystem>& sys) {
    std::vector<int> block_of(rho.rows(), -1);
    for (std::size_t b = 0; b < sys.size(); ++b)
        for (int i : sys[b].idx) block_of[i] = static_cast<int>(b);
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.cols(); ++c)
            if (block_of[r] != block_of[c] && std::abs(rho(r, c)) > 1e-10)
                return false;
    return true;
}

MatXcd extract_block(const MatXcd& m, const std::vector<int>& idx) {
    MatXcd out(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            out(r, c) = m(idx[r], idx[c]);
    return out;
}

}  // namespace

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.basis() != sigma.basis())
        throw std::invalid_argument("fidelity: states on different bases");
    const MatXcd s = sqrt_psd(rho.matrix());
    const double f = sum_sqrt_eigenvalues(s * sigma.matrix() * s);
    return std::min(1.0, f * f);
}

FidelityResult uhlmann_fidelity(const LocalOperator& h_var, const DensityMatrix& rho) {
    if (h_var.basis() != rho.basis())
        throw std::invalid_argument("uhlmann_fidelity: basis mismatch");
    auto sys = sector_eigensystems(h_var);
    if (sys.size() > 1 && !block_compatible(rho.matrix(), sys)) {
        // state mixes charge sectors; fall back to one dense block
        LocalOperator dense_h = h_var;
        SectorEigensystem whole;
        whole.idx.resize(rho.dim());
        for (std::size_t i = 0; i < rho.dim(); ++i) whole.idx[i] = static_cast<int>(i);
        Eigen::SelfAdjointEigenSolver<MatXcd> es(h_var.dense());
        whole.evals = es.eigenvalues();
        whole.evecs = es.eigenvectors();
        sys.assign(1, std::move(whole));
    }

    double e_min = sys[0].evals.minCoeff();
    for (const auto& b : sys) e_min = std::min(e_min, b.evals.minCoeff());

    std::vector<MatXcd> sqrt_rho;
    sqrt_rho.reserve(sys.size());
    for (const auto& b : sys)
        sqrt_rho.push_back(sqrt_psd(extract_block(rho.matrix(), b.idx)));

    auto fidelity_at = [&](double beta) {
        double z = 0.0;
        for (const auto& b : sys)
            z += (-beta * (b.evals.array() - e_min)).exp().sum();
        double root_sum = 0.0;
        for (std::size_t bi = 0; bi < sys.size(); ++bi) {
            const auto& b = sys[bi];
            Eigen::VectorXd w = (-beta * (b.evals.array() - e_min)).exp() / z;
            MatXcd gibbs = b.evecs * w.asDiagonal() * b.evecs.adjoint();
            root_sum += sum_sqrt_eigenvalues(sqrt_rho[bi] * gibbs * sqrt_rho[bi]);
        }
        return std::min(1.0, root_sum * root_sum);
    };

    // golden-section maximization on log beta
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(1e-3), hi = std::log(1e3);
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = fidelity_at(std::exp(x1)), f2 = fidelity_at(std::exp(x2));
    for (int it = 0; it < 120 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = fidelity_at(std::exp(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = fidelity_at(std::exp(x1));
        }
    }
    FidelityResult out;
    out.beta_star = std::exp(0.5 * (lo + hi));
    out.fidelity = fidelity_at(out.beta_star);
    return out;
}

FidelityResult uhlmann_fidelity(const AnsatzSpec& ansatz, const Eigen::VectorXd& g,
                                const DensityMatrix& rho) {
    return uhlmann_fidelity(deformed_hamiltonian(ansatz.terms, g), rho);
}

namespace {

double entropy_of(const MatXcd& rho) {
    Eigen::SelfAdjointEigenSolver<MatXcd> es(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double p = es.eigenvalues()(i);
        if (p > 1e-14) s -= p * std::log(p);
    }
    return s;
}

/// log Tr e^{-H}, Gibbs state, and Tr(rho_var h_j) for all terms at once.
struct GibbsEval {
    double log_z = 0.0;
    MatXcd rho_var;
};

GibbsEval gibbs_state(const std::vector<LocalOperator>& terms,
                      const Eigen::VectorXd& g) {
    const LocalOperator h = deformed_hamiltonian(terms, g);
    auto sys = sector_eigensystems(h);
    double e_min = sys[0].evals.minCoeff();
    for (const auto& b : sys) e_min = std::min(e_min, b.evals.minCoeff());
    double z = 0.0;
    for (const auto& b : sys) z += (-(b.evals.array() - e_min)).exp().sum();

    GibbsEval out;
    out.log_z = std::log(z) - e_min;
    out.rho_var = MatXcd::Zero(h.dim(), h.dim());
    for (const auto& b : sys) {
        Eigen::VectorXd w = (-(b.evals.array() - e_min)).exp() / z;
        MatXcd block = b.evecs * w.asDiagonal() * b.evecs.adjoint();
        for (std::size_t r = 0; r < b.idx.size(); ++r)
            for (std::size_t c = 0; c < b.idx.size(); ++c)
                out.rho_var(b.idx[r], b.idx[c]) = block(r, c);
    }
    return out;
}

}  // namespace

double relative_entropy(const DensityMatrix& rho,
                        const std::vector<LocalOperator>& terms,
                        const Eigen::VectorXd& g) {
    if (terms.empty()) throw std::invalid_argument("relative_entropy: no terms");
    if (terms.front().basis() != rho.basis())
        throw std::invalid_argument("relative_entropy: basis mismatch");
    double energy = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j)
        energy += g(j) * trace_product(rho.matrix(), terms[j].matrix());
    return -entropy_of(rho.matrix()) + energy + gibbs_state(terms, g).log_z;
}

RelativeEntropyResult relative_entropy_minimize(const AnsatzSpec& ansatz,
                                                const DensityMatrix& rho,
                                                const Eigen::VectorXd& init) {
    ansatz.validate();
    if (ansatz.terms.front().basis() != rho.basis())
        throw std::invalid_argument("relative_entropy_minimize: basis mismatch");
    const int n = static_cast<int>(ansatz.size());
    if (init.size() != n)
        throw std::invalid_argument("relative_entropy_minimize: init size mismatch");

    const double s0 = entropy_of(rho.matrix());
    Eigen::VectorXd t(n);
    for (int j = 0; j < n; ++j)
        t(j) = trace_product(rho.matrix(), ansatz.terms[j].matrix());

    double log_z = 0.0;
    auto value_grad = [&](const Eigen::VectorXd& a, Eigen::VectorXd& grad) {
        const GibbsEval ge = gibbs_state(ansatz.terms, a);
        log_z = ge.log_z;
        for (int j = 0; j < n; ++j)
            grad(j) = t(j) - trace_product(ge.rho_var, ansatz.terms[j].matrix());
        return -s0 + a.dot(t) + ge.log_z;
    };

    Eigen::VectorXd a = init, grad(n), grad_new(n);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    double f = value_grad(a, grad);

    RelativeEntropyResult out;
    const int max_iter = 500;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (grad.lpNorm<Eigen::Infinity>() < 1e-7) break;
        Eigen::VectorXd p = -hinv * grad;
        double slope = p.dot(grad);
        if (slope >= 0.0) {  // stale curvature estimate; restart from steepest descent
            hinv.setIdentity();
            p = -grad;
            slope = p.dot(grad);
        }
        double alpha = 1.0, f_new = 0.0;
        bool accepted = false;
        while (alpha > 1e-14) {
            f_new = value_grad(a + alpha * p, grad_new);
            if (f_new <= f + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // line-search failure: report last iterate
        const bool stagnant = f - f_new < 1e-15 * (1.0 + std::abs(f));

        const Eigen::VectorXd s = alpha * p;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const Eigen::VectorXd hy = hinv * y;
            hinv += ((sy + y.dot(hy)) / (sy * sy)) * (s * s.transpose()) -
                    (hy * s.transpose() + s * hy.transpose()) / sy;
        }
        a += s;
        f = f_new;
        grad = grad_new;
        if (stagnant) break;  // objective at its floating-point floor
    }

    out.converged = grad.lpNorm<Eigen::Infinity>() < 1e-7;
    out.g_re = a;
    out.beta = ansatz.fixed_index >= 0
                   ? a(ansatz.fixed_index) / ansatz.fixed_value
                   : a.norm();
    out.c = log_z;
    out.s_min = f;
    out.grad_norm = grad.lpNorm<Eigen::Infinity>();
    out.iterations = it;
    return out;
}

Eigen::VectorXd to_unit_norm(const Eigen::VectorXd& g) {
    const double n = g.norm();
    if (n < 1e-300) throw std::invalid_argument("to_unit_norm: zero vector");
    return g / n;
}

Eigen::VectorXd to_fixed_entry(const Eigen::VectorXd& g, int index, double value) {
    if (index < 0 || index >= g.size())
        throw std::invalid_argument("to_fixed_entry: index out of range");
    if (std::abs(g(index)) < 1e-300)
        throw std::invalid_argument("to_fixed_entry: pivot entry vanishes");
    return g * (value / g(index));
}

namespace {

SinFit fit_sin_ramp(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    double q3_init, double q4_init) {
    const int m = static_cast<int>(x.size());
    Eigen::Vector4d q(0.0, y.cwiseAbs().maxCoeff(), q3_init, q4_init);
    auto residual = [&](const Eigen::Vector4d& p, Eigen::VectorXd& r) {
        for (int i = 0; i < m; ++i)
            r(i) = p(0) + p(1) * std::sin(p(2) * (x(i) - p(3))) - y(i);
        return r.squaredNorm();
    };
    Eigen::VectorXd r(m), r_try(m);
    Eigen::MatrixXd jac(m, 4);
    double cost = residual(q, r);
    double lambda = 1e-3;
    for (int it = 0; it < 300; ++it) {
        for (int i = 0; i < m; ++i) {
            const double arg = q(2) * (x(i) - q(3));
            jac(i, 0) = 1.0;
            jac(i, 1) = std::sin(arg);
            jac(i, 2) = q(1) * (x(i) - q(3)) * std::cos(arg);
            jac(i, 3) = -q(1) * q(2) * std::cos(arg);
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d jtr = jac.transpose() * r;
        bool improved = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            const Eigen::Vector4d step =
                (jtj + lambda * Eigen::Matrix4d::Identity()).ldlt().solve(-jtr);
            const Eigen::Vector4d q_try = q + step;
            const double cost_try = residual(q_try, r_try);
            if (cost_try < cost) {
                q = q_try;
                r = r_try;
                cost = cost_try;
                lambda = std::max(1e-12, lambda / 3.0);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved || cost < 1e-24) break;
    }
    SinFit out;
    out.q1 = q(0);
    out.q2 = q(1);
    out.q3 = q(2);
    out.q4 = q(3);
    out.residual = std::sqrt(cost / m);
    return out;
}

}  // namespace

void ScaleCalibration::validate() const {
    if (!(beta > 0.0)) throw std::logic_error("calibration: beta must be positive");
    if (fits.empty()) throw std::logic_error("calibration: no fits");
    const SizeFit& last = fits.back();
    const double norm = (-(last.b * last.xi.array() + c)).exp().sum();
    if (std::abs(norm - 1.0) > 1e-6)
        throw std::logic_error("calibration: applied (beta, c) not normalized");
}

ScaleCalibration scale_from_schmidt_fit(const VecXcd& psi, const BasisPtr& full,
                                        const std::vector<int>& sizes,
                                        const HubbardParams& params) {
    if (sizes.empty()) throw std::invalid_argument("scale fit: no subsystem sizes");
    std::vector<int> order = sizes;
    std::sort(order.begin(), order.end());

    ScaleCalibration cal;
    DensityMatrix* rho_last = nullptr;
    std::unique_ptr<DensityMatrix> rho_store;
    std::vector<LocalOperator> terms_last;

    for (int n_a : order) {
        const int n = full->n_sites();
        if (n_a < 2 || n_a >= n)
            throw std::invalid_argument("scale fit: subsystem size out of range");
        std::vector<int> sites(n_a);
        for (int i = 0; i < n_a; ++i) sites[i] = n - n_a + i;

        DensityMatrix rho = partial_trace(psi, *full, sites);
        std::vector<LocalOperator> terms = build_local_terms(rho.basis(), params);
        std::vector<std::string> labels(terms.size());
        for (std::size_t j = 0; j < terms.size(); ++j)
            labels[j] = "site" + std::to_string(j);
        AnsatzSpec ansatz = make_site_ansatz(terms, labels, 0);

        Eigen::VectorXd init(terms.size());
        for (int j = 0; j < init.size(); ++j) init(j) = 1.0 + j;
        const RelativeEntropyResult re = relative_entropy_minimize(ansatz, rho, init);
        if (!re.converged)
            cal.warnings.push_back("size " + std::to_string(n_a) +
                                   ": relative-entropy fit did not converge");

        SizeFit fit;
        fit.sites = sites;
        fit.g_norm = to_unit_norm(re.g_re);
        const LocalOperator h_norm = deformed_hamiltonian(terms, fit.g_norm);

        Eigen::SelfAdjointEigenSolver<MatXcd> es(rho.matrix());
        std::vector<std::pair<double, double>> points;  // (xi, -log p)
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const double p = es.eigenvalues()(i);
            if (p <= 1e-12) continue;
            const VecXcd phi = es.eigenvectors().col(i);
            const double xi = (phi.adjoint() * (h_norm.matrix() * phi))(0).real();
            points.push_back({xi, -std::log(p)});
        }
        if (points.size() < 4)
            throw std::invalid_argument(
                "scale fit: fewer than 4 Schmidt values above cutoff for size " +
                std::to_string(n_a));
        std::sort(points.begin(), points.end());

        Eigen::MatrixXd design(points.size(), 2);
        Eigen::VectorXd y(points.size());
        fit.xi.resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            design(i, 0) = 1.0;
            design(i, 1) = points[i].first;
            fit.xi(i) = points[i].first;
            y(i) = points[i].second;
        }
        const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(y);
        fit.a = ab(0);
        fit.b = ab(1);
        fit.residual = (design * ab - y).norm() / std::sqrt(double(points.size()));
        fit.g_abs = fit.b * fit.g_norm;

        // ramp coordinate: local site index, entangling cut just left of index 0
        Eigen::VectorXd x(n_a);
        for (int i = 0; i < n_a; ++i) x(i) = i;
        fit.ramp = fit_sin_ramp(x, fit.g_abs, M_PI / (n_a + 1.0), -1.0);
        // slope of the fitted ramp where it crosses the x-axis
        double s = fit.ramp.q2 != 0.0 ? -fit.ramp.q1 / fit.ramp.q2 : 0.0;
        s = std::clamp(s, -1.0, 1.0);
        fit.beta = std::abs(fit.ramp.q2 * fit.ramp.q3) * std::sqrt(1.0 - s * s);
        cal.fits.push_back(std::move(fit));

        rho_store = std::make_unique<DensityMatrix>(std::move(rho));
        rho_last = rho_store.get();
        terms_last = std::move(terms);
    }

    double bmin = cal.fits.front().beta, bmax = bmin, bsum = 0.0;
    for (const SizeFit& f : cal.fits) {
        bmin = std::min(bmin, f.beta);
        bmax = std::max(bmax, f.beta);
        bsum += f.beta;
    }
    cal.beta = bsum / cal.fits.size();
    cal.beta_spread = (bmax - bmin) / cal.beta;

    const SizeFit& last = cal.fits.back();
    cal.c = std::log((-(last.b * last.xi.array())).exp().sum());
    cal.mu = sector_chemical_potentials(
        *rho_last,
        sector_eigenvalues(deformed_hamiltonian(terms_last, last.g_abs)),
        &cal.warnings);
    cal.validate();
    return cal;
}

std::vector<std::pair<Charge, double>> sector_chemical_potentials(
    const DensityMatrix& rho,
    const std::vector<std::pair<Charge, Eigen::VectorXd>>& spectra,
    std::vector<std::string>* warnings) {
    const auto& blocks = rho.basis()->charge_blocks();
    std::vector<int> block_of(rho.dim(), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int i : blocks[b].second) block_of[i] = static_cast<int>(b);
    for (std::size_t r = 0; r < rho.dim(); ++r)
        for (std::size_t c = 0; c < rho.dim(); ++c)
            if (block_of[r] != block_of[c] &&
                std::abs(rho.matrix()(r, c)) > 1e-10)
                throw std::invalid_argument(
                    "sector_chemical_potentials: state not block-diagonal in charge");

    std::vector<std::pair<Charge, double>> weights;
    double mean_n = 0.0;
    for (const auto& [q, idx] : blocks) {
        double p = 0.0;
        for (int i : idx) p += rho.matrix()(i, i).real();
        weights.push_back({q, p});
        mean_n += p * (q.up + q.down);
    }
    const long n0 = std::llround(mean_n);

    double z_var = 0.0;
    for (const auto& [q, xi] : spectra) z_var += (-xi.array()).exp().sum();
    if (z_var <= 0.0)
        throw std::invalid_argument("sector_chemical_potentials: empty spectra");

    std::vector<std::pair<Charge, double>> out;
    for (const auto& [q, xi] : spectra) {
        const long big_q = q.up + q.down - n0;
        if (big_q == 0) continue;
        double p = 0.0;
        for (const auto& [qr, pr] : weights)
            if (qr == q) p = pr;
        if (p < 1e-12) {
            if (warnings)
                warnings->push_back("sector (" + std::to_string(q.up) + "," +
                                    std::to_string(q.down) +
                                    ") skipped: weight below 1e-12");
            continue;
        }
        const double p_var = (-xi.array()).exp().sum() / z_var;
        out.push_back({q, -std::log(p / p_var) / static_cast<double>(big_q)});
    }
    return out;
}

}  // namespace ehlearn
