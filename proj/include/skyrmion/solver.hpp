#pragma once

#include "skyrmion/energy.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/fit.hpp"
#include "skyrmion/radial.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skyrmion {

struct SolverConfig {
    double newton_tol = 1e-10;   // on discrete::scaled_sup of the residual
    int max_newton_iters = 50;
    double damping = 0.5;        // step factor per backtrack
    int max_halvings = 30;
    double continuation_factor = 0.7; // becomes 0.85 below beta = 0.1
    double pg_step = 1.0;
    int pg_max_iters = 20000;
    double pg_tol = 1e-6;        // preconditioned projected-gradient norm; Newton polishes after
    int grid_points = 4096;
    std::optional<double> rmax;
    std::optional<double> robin_rate; // default sqrt(2) beta

    void validate() const;
};

enum class Method { newton, projected_gradient, hybrid };
std::string method_name(Method m);

struct ContinuationRecord {
    double beta;
    double residual;
};

struct SolveReport {
    Profile profile;
    double residual_norm = 0.0;
    int iterations = 0;
    std::vector<ContinuationRecord> path;
    Method method = Method::newton;
    bool converged = false;
    bool strictly_inside = false; // 0 < f < theta at every node (underflowed tail excepted)
    double pg_distance = 0.0;     // ||f_pg - f_polished||_X for minimize_constrained
    std::vector<double> energies; // objective after each accepted projected-gradient step
};

// Thrown when a solve fails; carries the best iterate so callers can still report.
class ConvergenceError : public NumericalError {
  public:
    ConvergenceError(const std::string& what, SolveReport best, double failing_beta)
        : NumericalError(what), report(std::move(best)), beta(failing_beta) {}
    SolveReport report;
    double beta;
};

std::vector<double> el_residual(const Profile& f, std::optional<double> robin_rate = std::nullopt);

SolveReport solve_newton(const ModelParams& p, const Profile& init, const SolverConfig& cfg = {});
SolveReport solve_continuation(const ModelParams& target, const SolverConfig& cfg = {});
SolveReport minimize_constrained(const ModelParams& p, const Profile& lower, const Profile& upper,
                                 const SolverConfig& cfg = {});

// Initial guess at the top of a continuation chain: the best dilation of the
// cut-off harmonic-map profile, measured by the discrete energy.
Profile initial_guess(GridPtr grid, const ModelParams& p);

bool strictly_inside(const Profile& f);

// The beta values a continuation chain visits, ending exactly at target.beta.
std::vector<double> continuation_schedule(const ModelParams& target, double factor = 0.7);

struct SweepMember {
    double beta;
    SolveReport report;
    double xnorm_diff;
};

struct SweepResult {
    FitResult fit; // slope of log ||f - theta||_X against log beta
    std::vector<SweepMember> members;
};

SweepResult difference_sweep(double r, std::span<const double> betas, const SolverConfig& cfg = {});

} // namespace skyrmion
