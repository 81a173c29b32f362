#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qmt/disintegration.hpp"
#include "qmt/gibbs.hpp"
#include "qmt/hamiltonian.hpp"
#include "qmt/json_io.hpp"
#include "qmt/models.hpp"
#include "qmt/qms.hpp"
#include "qmt/reconstruction.hpp"
#include "qmt/report.hpp"

namespace {

using namespace qmt;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitDimensionGuard = 3;

double resolve_tol(const Scenario& sc, const std::string& check, double fallback) {
    const auto it = sc.tolerances.find(check);
    return it == sc.tolerances.end() ? fallback : it->second;
}

void push_record(std::vector<CheckRecord>& records, const Scenario& sc,
                 const std::string& suite, const std::string& check,
                 const std::string& anchor, double residual, double fallback_tol) {
    CheckRecord r;
    r.suite = suite;
    r.check = check;
    r.anchor = anchor;
    r.residual = residual;
    r.tolerance = resolve_tol(sc, check, fallback_tol);
    r.pass = residual <= r.tolerance;
    records.push_back(std::move(r));
}

QmsSpec build_spec(const Scenario& sc, ExtractedClassical& bundle, bool& has_bundle) {
    if (sc.model == "ising") {
        IsingParams params;
        params.beta = sc.beta;
        params.j = sc.j;
        params.jp = sc.jp;
        params.k = sc.k;
        return ising_competing_model(params, sc.n).spec;
    }
    if (sc.model == "random") {
        return random_localized_qms(sc.seed, sc.k, sc.d, sc.q, sc.n);
    }
    bundle = bundle_from_json(read_text_file(sc.data_file));
    has_bundle = true;
    return spec_from_classical(bundle.data, bundle.factors, bundle.structure);
}

void run_canonical(const Scenario& sc, const QmsSpec& spec, std::size_t cap,
                   std::vector<CheckRecord>& records) {
    (void)cap;
    SiteTransitionExpectation src;
    if (sc.model == "random") {
        src = random_transition_expectation(sc.seed, sc.k, sc.d, sc.q);
    } else {
        src = spec.levels.at(0).per_site.at(0);
    }
    std::mt19937_64 rng(sc.seed ^ 0xc0ffee11u);
    const SiteTransitionExpectation got =
        canonical_form(src.map, src.site, src.level, src.d, src.k, rng);
    const Superop rebuilt = pinched_superop(src.d, src.k, got.blocks);
    push_record(records, sc, "canonical", "block-family-roundtrip",
                "cayley-qms:canonical-form-roundtrip", max_abs(rebuilt.m - src.map.m), 1e-10);
    const CpReport cp = positivity_report(src.map);
    const double pos = std::max(cp.unital_residual, std::max(0.0, -cp.min_choi_eigenvalue));
    push_record(records, sc, "canonical", "positivity", "cayley-qms:transition-positivity", pos,
                1e-9);
}

void run_markov(const Scenario& sc, const QmsSpec& spec, std::size_t cap,
                std::vector<CheckRecord>& records) {
    for (int j = 0; j + 1 <= spec.n_max(); ++j) {
        push_record(records, sc, "markov", "level-invariance-" + std::to_string(j),
                    "cayley-qms:level-invariance", markov_check(spec, j, cap), 1e-9);
    }
    const int depth = std::min(sc.n, spec.n_max());
    const FiniteVolumeState state = density_matrix(spec, depth, cap);
    std::mt19937_64 rng(sc.seed ^ 0x5eedf00du);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        LabeledOperator a(state.rho.op.support, state.rho.op.site_dims,
                          random_hermitian(rng, static_cast<int>(state.rho.op.total_dim())));
        const complexd lhs = evaluate_nested(spec, a, cap);
        const complexd rhs = (state.rho.matrix() * a.mat).trace();
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    push_record(records, sc, "markov", "nested-vs-pushed", "cayley-qms:nested-evaluation", worst,
                1e-10);

    // The root state must be the marginal of the one-ball density; a root
    // that disagrees with the block structure shows up only here.
    if (spec.n_max() >= 1) {
        const FiniteVolumeState one = density_matrix(spec, 1, cap);
        std::vector<int> dims(1 + static_cast<std::size_t>(spec.k), spec.d);
        std::vector<int> drop;
        for (int y = 0; y < spec.k; ++y) drop.push_back(1 + y);
        const MatrixXcd root = trace_out_legs(one.rho.matrix(), dims, drop);
        push_record(records, sc, "markov", "root-marginal", "cayley-qms:root-marginal",
                    max_abs(root - spec.rho0.matrix()), 1e-10);
    }
}

void run_gibbs(const Scenario& sc, const QmsSpec& spec, std::size_t cap,
               std::vector<CheckRecord>& records) {
    (void)cap;
    GibbsTable table = weights_from_qms(spec);
    if (sc.defects.scale_pi_row) {
        auto& level = table.weights.at(static_cast<std::size_t>(sc.defects.pi_level));
        if (sc.defects.pi_label < 0 || sc.defects.pi_label >= level.rows()) {
            throw std::invalid_argument("defect label out of range");
        }
        level.row(sc.defects.pi_label) *= sc.defects.pi_factor;
    }
    const int depth = std::min(sc.n, table.levels() - 1);
    const CompatibilityReport rep = compatibility_check(table, depth, sc.seed);
    push_record(records, sc, "gibbs", "chain-compatibility", "cayley-qms:measure-compatibility",
                rep.marginal_defect, 1e-11);
    push_record(records, sc, "gibbs", "normalization", "cayley-qms:measure-normalization",
                rep.normalization_defect, 1e-11);
}

void run_disintegrate(const Scenario& sc, const QmsSpec& spec, std::size_t cap,
                      std::vector<CheckRecord>& records) {
    const int depth = std::min(sc.n, spec.n_max());
    const DisintegrationReport rep = disintegration_check(spec, depth, cap);
    push_record(records, sc, "disintegrate", "mixture-density", "cayley-qms:product-mixture",
                rep.density_residual, 1e-9);
    push_record(records, sc, "disintegrate", "component-mass", "cayley-qms:component-mass",
                rep.weight_mass_defect, 1e-11);

    const int q = static_cast<int>(spec.levels.at(0).per_site.at(0).blocks.size());
    const std::size_t count = configuration_count(spec.k, q, depth);
    std::vector<std::size_t> ranks;
    if (count <= 64) {
        for (std::size_t r = 0; r < count; ++r) ranks.push_back(r);
    } else {
        std::mt19937_64 rng(sc.seed ^ 0xd15a55edu);
        std::uniform_int_distribution<std::size_t> pick(0, count - 1);
        for (int t = 0; t < 32; ++t) ranks.push_back(pick(rng));
    }
    double worst = 0.0;
    for (const std::size_t r : ranks) {
        const Configuration cfg = configuration_from_rank(spec.k, q, depth, r);
        for (int j = 0; j < depth; ++j) {
            try {
                worst = std::max(worst, component_markov_residual(spec, cfg, j, cap));
            } catch (const dimension_guard_error&) {
                throw;
            } catch (const std::exception&) {
                // Vanishing-weight component: nothing to check.
            }
        }
    }
    push_record(records, sc, "disintegrate", "component-invariance",
                "cayley-qms:component-invariance", worst, 1e-9);
}

void run_reconstruct(const Scenario& sc, const QmsSpec& spec, const ExtractedClassical& bundle,
                     bool has_bundle, std::size_t cap, std::vector<CheckRecord>& records) {
    const ExtractedClassical ex = has_bundle ? bundle : extract_classical(spec);
    const int depth = std::min(sc.n, ex.data.levels() - 2);
    if (depth < 0) {
        push_record(records, sc, "reconstruct", "data-validation", "cayley-qms:data-validation",
                    1.0, 0.5);
        return;
    }
    const ReconstructionReport rep =
        verify_reconstruction(ex.data, ex.factors, ex.structure, depth, cap);
    push_record(records, sc, "reconstruct", "data-validation", "cayley-qms:data-validation",
                rep.precheck_ok ? 0.0 : 1.0, 0.5);
    if (!rep.precheck_ok) {
        std::cerr << "reconstruction pre-check failed: " << rep.precheck_message << "\n";
        return;
    }
    push_record(records, sc, "reconstruct", "chain-invariance", "cayley-qms:chain-invariance",
                rep.max_markov_residual, 1e-9);
    push_record(records, sc, "reconstruct", "density-rebuild", "cayley-qms:density-rebuild",
                rep.density_residual, 1e-9);
    push_record(records, sc, "reconstruct", "factorization-identity",
                "cayley-qms:factorization-identity", rep.transition_identity_residual, 1e-10);
}

void run_hamiltonian(const Scenario& sc, const QmsSpec& spec, std::size_t cap,
                     std::vector<CheckRecord>& records) {
    const int depth = std::min(sc.n, spec.n_max());
    const InteractionDecomposition dec = decompose(spec, depth, 1e300, cap);
    const LabeledOperator direct = potential_from_state(density_matrix(spec, depth, cap));
    const double reassembly = max_abs(assemble_potential(dec, depth, cap).mat - direct.mat);
    push_record(records, sc, "hamiltonian", "potential-reassembly",
                "cayley-qms:potential-reassembly", reassembly, 1e-9);

    const CommutatorResiduals cr = commutation_residuals(dec, cap);
    push_record(records, sc, "hamiltonian", "root-bond-commutator",
                "cayley-qms:interaction-commutators", cr.root_bond, 1e-10);
    push_record(records, sc, "hamiltonian", "bond-boundary-commutator",
                "cayley-qms:interaction-commutators", cr.bond_boundary, 1e-10);
    push_record(records, sc, "hamiltonian", "root-boundary-commutator",
                "cayley-qms:interaction-commutators", cr.root_boundary, 1e-10);
    push_record(records, sc, "hamiltonian", "bond-bond-commutator",
                "cayley-qms:interaction-commutators", cr.bond_bond, 1e-10);

    if (depth >= 1) {
        const QmsSpec induced = qms_from_hamiltonian(dec);
        double inv = 0.0;
        for (int j = 0; j + 1 <= induced.n_max(); ++j) {
            inv = std::max(inv, markov_check(induced, j, cap));
        }
        push_record(records, sc, "hamiltonian", "induced-chain-invariance",
                    "cayley-qms:induced-chain", inv, 1e-9);
        const double dm = max_abs(density_matrix(induced, depth, cap).rho.matrix() -
                                  density_matrix(spec, depth, cap).rho.matrix());
        push_record(records, sc, "hamiltonian", "induced-density-match",
                    "cayley-qms:induced-density", dm, 1e-9);
    }
}

int run_scenario(const Scenario& sc, std::size_t cap) {
    ExtractedClassical bundle;
    bool has_bundle = false;
    std::optional<QmsSpec> built;
    try {
        built = build_spec(sc, bundle, has_bundle);
        if (sc.defects.rho0_perturbation != 0.0) {
            MatrixXcd rho = built->rho0.matrix();
            rho(0, 0) += sc.defects.rho0_perturbation;
            rho /= rho.trace().real();
            built->rho0 =
                DensityState(LabeledOperator({root_site(built->k)}, {built->d}, std::move(rho)));
        }
    } catch (const dimension_guard_error& e) {
        std::cerr << "dimension guard: " << e.what() << "\n";
        return kExitDimensionGuard;
    } catch (const std::exception& e) {
        std::cerr << "cannot build the scenario model: " << e.what() << "\n";
        return kExitConfigError;
    }
    const QmsSpec& spec = *built;

    std::vector<CheckRecord> records;
    try {
        for (const std::string& suite : sc.suites) {
            try {
                if (suite == "canonical") run_canonical(sc, spec, cap, records);
                else if (suite == "markov") run_markov(sc, spec, cap, records);
                else if (suite == "gibbs") run_gibbs(sc, spec, cap, records);
                else if (suite == "disintegrate") run_disintegrate(sc, spec, cap, records);
                else if (suite == "reconstruct")
                    run_reconstruct(sc, spec, bundle, has_bundle, cap, records);
                else if (suite == "hamiltonian") run_hamiltonian(sc, spec, cap, records);
            } catch (const dimension_guard_error&) {
                throw;
            } catch (const std::exception& e) {
                std::cerr << "suite " << suite << " aborted: " << e.what() << "\n";
                push_record(records, sc, suite, "execution", "cayley-qms:suite-execution", 1.0,
                            0.5);
            }
        }
    } catch (const dimension_guard_error& e) {
        std::cerr << "dimension guard: " << e.what() << "\n";
        return kExitDimensionGuard;
    }

    const std::string text =
        sc.format == "csv" ? render_report_csv(records) : render_report_json(records);
    try {
        write_text_file(sc.out_path, text);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    }

    for (const auto& r : records) {
        if (!r.pass) return kExitCheckFailure;
    }
    return kExitPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-volume quantum Markov states on Cayley trees"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string format_override;
    std::size_t max_dim = 0;

    CLI::App* run = app.add_subcommand("run", "run a scenario config and write its report");
    run->add_option("config", config_path, "scenario JSON document")->required();
    run->add_option("--out", out_override, "report path override");
    run->add_option("--format", format_override, "report format override")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--max-dim", max_dim, "total-dimension guard override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfigError;
    }

    Scenario sc;
    try {
        sc = scenario_from_json(read_text_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    }
    if (!out_override.empty()) sc.out_path = out_override;
    if (!format_override.empty()) sc.format = format_override;
    const std::size_t cap = max_dim > 0 ? max_dim : tol::max_dimension;

    return run_scenario(sc, cap);
}
