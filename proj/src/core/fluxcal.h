// Voltage-to-flux calibration and circuit-parameter extraction from two-tone
// spectroscopy peak lists.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "core/eigensolver.h"
#include "core/fitting.h"
#include "core/types.h"

namespace fluxmol {

// Affine map from the two bias voltages to the reduced fluxes:
//   phi_c = alpha_m v_m + alpha_l v_l + phi_offset_c
//   phi_d = beta_m  v_m + beta_l  v_l + phi_offset_d
struct FluxCalibration {
    double alpha_m = 1.0;  // rad/V
    double alpha_l = 0.0;
    double beta_m = 0.0;
    double beta_l = 1.0;
    double phi_offset_c = 0.0;  // rad
    double phi_offset_d = 0.0;

    // Coefficient matrix must be invertible: |det| > 1e-12 rad^2/V^2.
    void validate() const;
    double det() const { return alpha_m * beta_l - alpha_l * beta_m; }
};

void to_json(nlohmann::json& j, const FluxCalibration& c);
void from_json(const nlohmann::json& j, FluxCalibration& c);

FluxPoint flux_from_voltages(const FluxCalibration& cal, double v_m, double v_l);
// Inverse of flux_from_voltages (exists because the matrix is invertible).
void voltages_from_flux(const FluxCalibration& cal, const FluxPoint& flux, double& v_m,
                        double& v_l);

// A bias point sitting on a known flux-quantum feature: phi_c = 2 pi n_c,
// phi_d = 2 pi n_d.
struct CalibrationAnchor {
    double v_m = 0.0;  // V
    double v_l = 0.0;
    int n_c = 0;
    int n_d = 0;
};

// Linear least squares for the six calibration parameters.  Needs at least
// four anchors whose voltages span both axes; throws invalid_input on a
// rank-deficient anchor set.
FluxCalibration fit_calibration(const std::vector<CalibrationAnchor>& anchors);

// One extracted spectroscopy peak.  from_state/to_state are both set (a
// labeled transition) or both absent.
struct TwoToneRecord {
    FluxPoint flux{};
    double f_ghz = 0.0;
    double sigma_ghz = 0.01;
    std::optional<int> from_state;
    std::optional<int> to_state;

    bool labeled() const { return from_state.has_value() && to_state.has_value(); }
};

struct TwoToneDataset {
    std::vector<TwoToneRecord> records;

    void validate() const;  // f > 0, sigma > 0, labels consistent

    // CSV with columns phi_c_rad, phi_d_rad, f_GHz, sigma_GHz and optional
    // from_state, to_state.  Voltage-space data uses v_m_V, v_l_V instead of
    // the flux columns and needs a calibration to convert.  sigma_GHz may be
    // omitted entirely, in which case every record gets a uniform 10 MHz.
    static TwoToneDataset from_csv_text(const std::string& text,
                                        const FluxCalibration* cal = nullptr);
    std::string to_csv_text() const;
};

struct PredictedTransition {
    int from = 0;
    int to = 0;
    double f_ghz = 0.0;
};

struct PredictOptions {
    std::vector<int> from_states = {0, 1};
    double max_f_ghz = 25.0;
    // How many eigenstates to resolve as transition targets.
    int max_states = 12;
    BasisTruncation trunc{};
    DiagOptions diag{};
};

// Transition frequencies E_j - E_i out of the given initial states, computed
// from the three-mode model (disorder terms included when the parameters
// carry any).  Sorted by (from, frequency).
std::vector<PredictedTransition> predict_transitions(const CircuitParams& params,
                                                     const FluxPoint& flux,
                                                     const PredictOptions& opt = {});

// Box bounds on the five circuit energies.  Disorder fields are ignored: the
// fit holds them at zero.
struct FitBounds {
    CircuitParams lower{};
    CircuitParams upper{};

    void validate() const;
    // Symmetric box: center scaled by (1 -+ frac).
    static FitBounds fractional(const CircuitParams& center, double frac);
};

struct CircuitFitOptions {
    BasisTruncation trunc{};
    DiagOptions diag{};
    LMOptions lm{};
    // Latin-hypercube perturbations of the initial guess tried in addition to
    // the initial guess itself.
    int restarts = 8;
    double restart_spread = 0.15;  // fractional half-width of the perturbation box
    // Unlabeled peaks farther than this from every predicted line are dropped
    // from the pass; two predictions inside the window mean the peak is
    // ambiguous and its squared residual is halved.
    double assign_window_ghz = 0.3;
    int max_assignment_rounds = 8;
    int max_states = 12;
    std::vector<int> from_states = {0, 1};
    std::uint64_t seed = 0x63616cu;
    int threads = 1;
};

struct CircuitFitResult {
    CircuitParams params{};  // disorder fields zero
    // Confidence half-widths for (EJ, EL, ELs, ECJ, EC) from the Jacobian at
    // the solution; infinite where the data does not constrain a direction.
    std::array<double, 5> half_width_ghz{};
    double residual_rms_ghz = 0.0;  // unweighted, over records that entered the fit
    double cost = 0.0;              // sum of squared sigma-weighted residuals
    int iterations = 0;
    bool converged = false;
    bool misfit = false;  // residual RMS above five times the median sigma
    int rejected = 0;     // unlabeled peaks outside the assignment window
    int ambiguous = 0;
};

nlohmann::json fit_result_to_json(const CircuitFitResult& r);

// Weighted least squares over the five circuit energies, matching observed
// peaks to model transition frequencies.  Labeled records pin their own
// transition; unlabeled records are re-assigned to the nearest predicted line
// between optimizer passes until the assignment stops changing.
CircuitFitResult fit_circuit_params(const TwoToneDataset& data, const CircuitParams& initial,
                                    const FitBounds& bounds, const CircuitFitOptions& opt = {});

}  // namespace fluxmol
