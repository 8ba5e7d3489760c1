#include "core/sweep.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "core/constants.h"
#include "core/errors.h"
#include "core/hamiltonian.h"
#include "core/parallel.h"

namespace fluxmol {

void FluxTrajectory::validate() const {
    if (waypoints.size() < 2)
        throw invalid_input("flux trajectory needs at least two waypoints");
    if (samples_per_segment < 2)
        throw invalid_input("flux trajectory needs at least two samples per segment");
    for (const auto& w : waypoints) w.validate();
}

std::vector<FluxPoint> FluxTrajectory::sample() const {
    validate();
    std::vector<FluxPoint> out;
    for (size_t s = 0; s + 1 < waypoints.size(); ++s) {
        const FluxPoint& a = waypoints[s];
        const FluxPoint& b = waypoints[s + 1];
        const int first = (s == 0) ? 0 : 1;  // shared endpoint emitted once
        for (int i = first; i < samples_per_segment; ++i) {
            const double t = static_cast<double>(i) / (samples_per_segment - 1);
            out.push_back({a.phi_c + t * (b.phi_c - a.phi_c), a.phi_d + t * (b.phi_d - a.phi_d)});
        }
    }
    return out;
}

namespace {

// Best assignment between previous tracked states (rows) and current
// eigenstates (columns), maximizing the summed squared overlap.  Exhaustive
// for small k, greedy beyond.
std::vector<int> assign_by_overlap(const Eigen::MatrixXd& ov2) {
    const int k = static_cast<int>(ov2.rows());
    if (k <= 8) {
        std::vector<int> perm(k), best(k);
        std::iota(perm.begin(), perm.end(), 0);
        best = perm;
        double best_score = -1.0;
        do {
            double score = 0.0;
            for (int r = 0; r < k; ++r) score += ov2(r, perm[r]);
            if (score > best_score) {
                best_score = score;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<int> out(k, -1);
    std::vector<bool> row_used(k, false), col_used(k, false);
    for (int pick = 0; pick < k; ++pick) {
        int br = -1, bc = -1;
        double best = -1.0;
        for (int r = 0; r < k; ++r) {
            if (row_used[r]) continue;
            for (int c = 0; c < k; ++c) {
                if (col_used[c]) continue;
                if (ov2(r, c) > best) {
                    best = ov2(r, c);
                    br = r;
                    bc = c;
                }
            }
        }
        out[br] = bc;
        row_used[br] = true;
        col_used[bc] = true;
    }
    return out;
}

Spectrum diag_at(const CircuitParams& p, const FluxPoint& f, int k, CircuitModel model,
                 const BasisTruncation& trunc, const DiagOptions& diag) {
    OperatorMatrix h = build_hamiltonian(p, f, trunc, model);
    return diagonalize(h, k, diag);
}

}  // namespace

Spectrum circuit_spectrum(const CircuitParams& p, const FluxPoint& flux, int k,
                          const SweepOptions& opts) {
    Spectrum s = diag_at(p, flux, k, opts.model, opts.trunc, opts.diag);
    s.flux = flux;
    s.has_flux_context = true;
    return s;
}

SweepResult sweep_trajectory(const CircuitParams& p, const FluxTrajectory& traj, int k,
                             const SweepOptions& opts) {
    SweepResult res;
    res.points = traj.sample();
    const long n = static_cast<long>(res.points.size());
    res.spectra.resize(n);
    parallel_for(n, opts.threads, [&](long i) {
        try {
            res.spectra[i] = circuit_spectrum(p, res.points[i], k, opts);
        } catch (const numeric_failure& e) {
            throw numeric_failure("at flux (" + std::to_string(res.points[i].phi_c) + ", " +
                                  std::to_string(res.points[i].phi_d) + "): " + e.what());
        }
    });

    res.tracked.resize(n);
    std::vector<int> cur(k);
    std::iota(cur.begin(), cur.end(), 0);
    res.tracked[0] = cur;
    for (long s = 1; s < n; ++s) {
        const Eigen::MatrixXd& prev_v = res.spectra[s - 1].eigenvectors;
        const Eigen::MatrixXd& cur_v = res.spectra[s].eigenvectors;
        Eigen::MatrixXd ov2(k, k);
        for (int a = 0; a < k; ++a) {
            const auto pv = prev_v.col(res.tracked[s - 1][a]);
            for (int b = 0; b < k; ++b) {
                const double o = pv.dot(cur_v.col(b));
                ov2(a, b) = o * o;
            }
        }
        res.tracked[s] = assign_by_overlap(ov2);
    }
    return res;
}

namespace {

struct Stencil {
    // Energies of the lowest k states at the eight displaced points plus the
    // center: [component][offset] with offsets {-h, -h/2, +h/2, +h}.
    Eigen::VectorXd center;
    Eigen::VectorXd e[2][4];
};

Stencil eval_stencil(const CircuitParams& p, const FluxPoint& flux, int k,
                     const DispersionOptions& opts) {
    if (!(opts.step >= 1e-4 && opts.step <= 1e-1))
        throw invalid_input("flux dispersion: step must lie in [1e-4, 1e-1] rad");
    flux.validate();
    const double offs[4] = {-opts.step, -opts.step / 2.0, opts.step / 2.0, opts.step};
    Stencil st;
    st.center = diag_at(p, flux, k, opts.model, opts.trunc, opts.diag).eigenvalues;
    for (int c = 0; c < 2; ++c) {
        for (int o = 0; o < 4; ++o) {
            FluxPoint f = flux;
            (c == 0 ? f.phi_c : f.phi_d) += offs[o];
            st.e[c][o] = diag_at(p, f, k, opts.model, opts.trunc, opts.diag).eigenvalues;
        }
    }
    return st;
}

DispersionResult pair_dispersion(const Stencil& st, int i, int j, double h, double floor_ghz) {
    DispersionResult r;
    for (int c = 0; c < 2; ++c) {
        const double gh =
            ((st.e[c][3][j] - st.e[c][3][i]) - (st.e[c][0][j] - st.e[c][0][i])) / (2.0 * h);
        const double gh2 =
            ((st.e[c][2][j] - st.e[c][2][i]) - (st.e[c][1][j] - st.e[c][1][i])) / h;
        r.grad[c] = (4.0 * gh2 - gh) / 3.0;
    }
    r.unresolved = std::abs(st.center[j] - st.center[i]) < floor_ghz;
    return r;
}

double degeneracy_floor(const Stencil& st, const DispersionOptions& opts) {
    const double scale =
        std::max(std::abs(st.center[0]), std::abs(st.center[st.center.size() - 1]));
    return std::max(1e-6, 10.0 * opts.diag.tol * std::max(1.0, scale));
}

}  // namespace

DispersionResult flux_dispersion(const CircuitParams& p, const FluxPoint& flux, int i, int j,
                                 const DispersionOptions& opts) {
    if (i == j) throw invalid_input("flux dispersion: states must differ");
    const int k = std::max(i, j) + 1;
    Stencil st = eval_stencil(p, flux, k, opts);
    return pair_dispersion(st, i, j, opts.step, degeneracy_floor(st, opts));
}

std::vector<DispersionResult> flux_dispersion_all(const CircuitParams& p, const FluxPoint& flux,
                                                  int k, const DispersionOptions& opts) {
    if (k < 2) throw invalid_input("flux dispersion: need at least two states");
    Stencil st = eval_stencil(p, flux, k, opts);
    const double floor_ghz = degeneracy_floor(st, opts);
    std::vector<DispersionResult> out;
    out.reserve(static_cast<size_t>(k) * (k - 1) / 2);
    for (int j = 1; j < k; ++j)
        for (int i = 0; i < j; ++i)
            out.push_back(pair_dispersion(st, i, j, opts.step, floor_ghz));
    return out;
}

namespace {

using constants::pi;
using constants::two_pi;

double wrap_2pi(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

double circ_dist(double a, double b) {
    double d = std::abs(wrap_2pi(a) - wrap_2pi(b));
    return std::min(d, two_pi - d);
}

std::string classify_sweet_spot(const FluxPoint& f) {
    struct Entry {
        double c, d;
        const char* label;
    };
    // Residues of the four families of first-order-insensitive points inside
    // one 2 pi cell.  The diagonal half-flux family appears at four residues;
    // the mirror-related pair shares the spectrum of the canonical one at
    // zero element asymmetry.
    static const Entry table[] = {
        {pi, pi, "I"},
        {0.0, 0.0, "I'"},
        {pi, 0.0, "II"},
        {0.0, pi, "II"},
        {pi / 2, pi / 2, "III"},
        {3 * pi / 2, 3 * pi / 2, "III"},
        {pi / 2, 3 * pi / 2, "III"},
        {3 * pi / 2, pi / 2, "III"},
    };
    for (const auto& e : table) {
        if (circ_dist(f.phi_c, e.c) < 1e-2 && circ_dist(f.phi_d, e.d) < 1e-2) return e.label;
    }
    return "other";
}

// Stacked flux gradients of all transitions among the lowest n levels, by
// plain central differences (cheap variant used inside the refinement loop).
Eigen::VectorXd stacked_gradients(const CircuitParams& p, const FluxPoint& flux, int n_levels,
                                  const BasisTruncation& trunc, const DiagOptions& diag,
                                  CircuitModel model, double h) {
    Eigen::VectorXd e[2][2];
    for (int c = 0; c < 2; ++c) {
        for (int s = 0; s < 2; ++s) {
            FluxPoint f = flux;
            (c == 0 ? f.phi_c : f.phi_d) += (s == 0 ? -h : h);
            e[c][s] = diag_at(p, f, n_levels, model, trunc, diag).eigenvalues;
        }
    }
    const int npairs = n_levels * (n_levels - 1) / 2;
    Eigen::VectorXd g(2 * npairs);
    int idx = 0;
    for (int j = 1; j < n_levels; ++j) {
        for (int i = 0; i < j; ++i) {
            for (int c = 0; c < 2; ++c) {
                g[idx * 2 + c] = ((e[c][1][j] - e[c][1][i]) - (e[c][0][j] - e[c][0][i])) / (2 * h);
            }
            ++idx;
        }
    }
    return g;
}

}  // namespace

std::vector<SweetSpot> find_sweet_spots(const CircuitParams& p, double c0, double c1, double d0,
                                        double d1, const SweetSpotOptions& opts) {
    if (!(c1 - c0 >= two_pi - 1e-9) || !(d1 - d0 >= two_pi - 1e-9))
        throw invalid_input("sweet-spot search region must span at least 2 pi per axis");
    if (opts.grid < 4) throw invalid_input("sweet-spot search grid must be at least 4");
    if (opts.n_levels < 2 || opts.n_levels > 8)
        throw invalid_input("sweet-spot search tracks between 2 and 8 levels");

    const double h = 1e-3;

    // Seeds, pass one: the symmetry lattice.  Flux inversion about any point
    // with both coordinates at multiples of pi/2 of equal parity kills every
    // first-order flux derivative, so these are exact stationary points at
    // any truncation.
    std::vector<FluxPoint> seeds;
    auto push_seed = [&](double c, double d) {
        for (const auto& s : seeds)
            if (std::abs(s.phi_c - c) < 1e-6 && std::abs(s.phi_d - d) < 1e-6) return;
        seeds.push_back({c, d});
    };
    {
        const long mlo = static_cast<long>(std::ceil((c0 - 1e-9) / (pi / 2)));
        const long mhi = static_cast<long>(std::floor((c1 + 1e-9) / (pi / 2)));
        const long nlo = static_cast<long>(std::ceil((d0 - 1e-9) / (pi / 2)));
        const long nhi = static_cast<long>(std::floor((d1 + 1e-9) / (pi / 2)));
        for (long m = mlo; m <= mhi; ++m)
            for (long n = nlo; n <= nhi; ++n)
                if (((m - n) % 2) == 0) push_seed(m * (pi / 2), n * (pi / 2));
    }

    // Seeds, pass two: coarse grid minima of the summed squared gradients,
    // to catch anything the lattice does not cover.
    {
        const int g = opts.grid;
        Eigen::MatrixXd fval(g, g);
        std::vector<std::pair<int, int>> cells;
        for (int a = 0; a < g; ++a)
            for (int b = 0; b < g; ++b) cells.push_back({a, b});
        parallel_for(static_cast<long>(cells.size()), opts.threads, [&](long ci) {
            const auto [a, b] = cells[static_cast<size_t>(ci)];
            const FluxPoint f{c0 + (c1 - c0) * a / (g - 1), d0 + (d1 - d0) * b / (g - 1)};
            fval(a, b) = stacked_gradients(p, f, opts.n_levels, opts.search_trunc, opts.diag,
                                           opts.model, h)
                             .squaredNorm();
        });
        for (int a = 1; a + 1 < g; ++a) {
            for (int b = 1; b + 1 < g; ++b) {
                bool is_min = true;
                for (int da = -1; da <= 1 && is_min; ++da)
                    for (int db = -1; db <= 1; ++db) {
                        if (da == 0 && db == 0) continue;
                        if (fval(a + da, b + db) < fval(a, b)) {
                            is_min = false;
                            break;
                        }
                    }
                if (!is_min) continue;
                const FluxPoint f{c0 + (c1 - c0) * a / (g - 1), d0 + (d1 - d0) * b / (g - 1)};
                bool near_existing = false;
                for (const auto& s : seeds) {
                    if (std::hypot(s.phi_c - f.phi_c, s.phi_d - f.phi_d) < 0.5) {
                        near_existing = true;
                        break;
                    }
                }
                if (!near_existing) push_seed(f.phi_c, f.phi_d);
            }
        }
    }

    // Refine each seed: damped Gauss-Newton on the stacked gradient vector,
    // which is linear in the displacement near a stationary point.
    std::vector<SweetSpot> refined(seeds.size());
    std::vector<char> keep(seeds.size(), 0);
    parallel_for(static_cast<long>(seeds.size()), opts.threads, [&](long si) {
        FluxPoint f = seeds[static_cast<size_t>(si)];
        auto gfun = [&](const FluxPoint& q) {
            return stacked_gradients(p, q, opts.n_levels, opts.search_trunc, opts.diag,
                                     opts.model, h);
        };
        Eigen::VectorXd g = gfun(f);
        for (int iter = 0; iter < 30 && g.lpNorm<Eigen::Infinity>() > opts.tol / 4; ++iter) {
            const double dj = 1e-3;
            Eigen::MatrixXd jac(g.size(), 2);
            for (int c = 0; c < 2; ++c) {
                FluxPoint fp = f, fm = f;
                (c == 0 ? fp.phi_c : fp.phi_d) += dj;
                (c == 0 ? fm.phi_c : fm.phi_d) -= dj;
                jac.col(c) = (gfun(fp) - gfun(fm)) / (2 * dj);
            }
            Eigen::Matrix2d jtj = jac.transpose() * jac;
            jtj.diagonal().array() += 1e-12 * jtj.trace();
            Eigen::Vector2d step = jtj.ldlt().solve(jac.transpose() * g);
            double lambda = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < 8; ++bt) {
                FluxPoint trial{f.phi_c - lambda * step[0], f.phi_d - lambda * step[1]};
                Eigen::VectorXd gt = gfun(trial);
                if (gt.squaredNorm() < g.squaredNorm()) {
                    f = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
                lambda /= 2.0;
            }
            if (!accepted) break;
        }
        if (g.lpNorm<Eigen::Infinity>() > opts.tol) return;  // did not converge at search level

        // Verify at the caller truncation with the Richardson stencil.
        DispersionOptions dopts;
        dopts.step = h;
        dopts.model = opts.model;
        dopts.trunc = opts.trunc;
        dopts.diag = opts.diag;
        auto pairs = flux_dispersion_all(p, f, opts.n_levels, dopts);
        double resid = 0.0;
        for (const auto& pr : pairs)
            resid = std::max(resid, pr.grad.lpNorm<Eigen::Infinity>());
        if (resid > opts.tol) return;
        refined[static_cast<size_t>(si)] = SweetSpot{f, classify_sweet_spot(f), resid};
        keep[static_cast<size_t>(si)] = 1;
    });

    std::vector<SweetSpot> out;
    for (size_t i = 0; i < seeds.size(); ++i) {
        if (!keep[i]) continue;
        bool dup = false;
        for (const auto& s : out) {
            if (std::abs(s.flux.phi_c - refined[i].flux.phi_c) < 1e-6 &&
                std::abs(s.flux.phi_d - refined[i].flux.phi_d) < 1e-6) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(refined[i]);
    }
    std::sort(out.begin(), out.end(), [](const SweetSpot& a, const SweetSpot& b) {
        if (a.flux.phi_c != b.flux.phi_c) return a.flux.phi_c < b.flux.phi_c;
        return a.flux.phi_d < b.flux.phi_d;
    });
    return out;
}

std::vector<CrossingInfo> avoided_crossing_gaps(const SweepResult& sweep) {
    std::vector<CrossingInfo> out;
    const long n = static_cast<long>(sweep.points.size());
    if (n < 3 || sweep.spectra.empty()) return out;
    const int k = sweep.spectra[0].k();

    for (int lev = 0; lev + 1 < k; ++lev) {
        for (long m = 1; m + 1 < n; ++m) {
            auto sep = [&](long s) {
                return sweep.spectra[s].eigenvalues[lev + 1] - sweep.spectra[s].eigenvalues[lev];
            };
            const double sm = sep(m);
            if (!(sm < sep(m - 1) && sm < sep(m + 1))) continue;

            // Parabola through the squared separation; exact for a two-level
            // avoided crossing, where sep^2 is quadratic in the sweep
            // parameter.
            const double y0 = sep(m - 1) * sep(m - 1);
            const double y1 = sm * sm;
            const double y2 = sep(m + 1) * sep(m + 1);
            const double a = (y0 - 2 * y1 + y2) / 2.0;
            const double b = (y2 - y0) / 2.0;
            double dx = 0.0;
            if (a > 0.0) dx = std::clamp(-b / (2.0 * a), -1.0, 1.0);
            const double ymin = y1 + b * dx + a * dx * dx;

            CrossingInfo ci;
            ci.sample_pos = static_cast<double>(m) + dx;
            const long lo = static_cast<long>(std::floor(ci.sample_pos));
            const long hi = std::min(lo + 1, n - 1);
            const double t = ci.sample_pos - lo;
            ci.flux.phi_c =
                sweep.points[lo].phi_c + t * (sweep.points[hi].phi_c - sweep.points[lo].phi_c);
            ci.flux.phi_d =
                sweep.points[lo].phi_d + t * (sweep.points[hi].phi_d - sweep.points[lo].phi_d);
            ci.gap = std::sqrt(std::max(ymin, 0.0));

            // Which tracked labels occupy the two colliding levels here.
            int slot_a = lev, slot_b = lev + 1;
            for (int slot = 0; slot < k; ++slot) {
                if (sweep.tracked[m][slot] == lev) slot_a = slot;
                if (sweep.tracked[m][slot] == lev + 1) slot_b = slot;
            }
            ci.slot_a = std::min(slot_a, slot_b);
            ci.slot_b = std::max(slot_a, slot_b);
            out.push_back(ci);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CrossingInfo& x, const CrossingInfo& y) { return x.sample_pos < y.sample_pos; });
    return out;
}

}  // namespace fluxmol
