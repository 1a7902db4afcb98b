// Command-line surface: scenario simulation, closed-form theory evaluation,
// one-shot decomposition of a data file, and the count-matrix analysis
// pipeline. Exit codes: 0 success, 2 config error, 3 data error, 4 numeric
// error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <fissionlab/fissionlab.hpp>

namespace fs = std::filesystem;
using namespace fissionlab;

namespace {

constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_DATA = 3;
constexpr int EXIT_NUMERIC = 4;

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("FISSIONLAB_SEED");
    if (!v || !*v) return std::nullopt;
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("FISSIONLAB_SEED is not a valid unsigned integer");
    }
}

// Plain numeric CSV (no header), used for covariance / theta scale files.
Matrix read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            row.push_back(parse_double_field(field));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

struct SimulateArgs {
    std::string scenario;
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 0;
    std::string out_dir = "out";
    std::string mode = "config";
    bool qq = false;
    bool both_t_variants = false;
    bool per_variable = false;
};

ScenarioConfig resolve_scenario(const std::string& ref) {
    for (auto& cfg : builtin_scenarios())
        if (cfg.name == ref) return cfg;
    if (fs::exists(ref)) {
        std::ifstream in(ref);
        nlohmann::json j;
        in >> j;
        return scenario_from_json(j);
    }
    throw ConfigError("scenario '" + ref +
                      "' is neither a builtin name nor a config file");
}

int cmd_simulate(const SimulateArgs& args) {
    ScenarioConfig cfg = resolve_scenario(args.scenario);
    if (args.replicates) cfg.replicates = *args.replicates;
    if (args.seed)
        cfg.master_seed = Seed{*args.seed};
    else if (auto s = env_seed())
        cfg.master_seed = Seed{*s};

    std::vector<FissionMode> modes;
    if (args.mode == "config")
        modes = {cfg.fission_mode};
    else if (args.mode == "marginal")
        modes = {FissionMode::Marginal};
    else if (args.mode == "conditional")
        modes = {FissionMode::ConditionalOracle};
    else if (args.mode == "both")
        modes = {FissionMode::Marginal, FissionMode::ConditionalOracle};
    else
        throw ConfigError("--mode must be marginal, conditional, both or config");

    std::vector<TestMethod> tests{cfg.test};
    if (args.both_t_variants && cfg.test != TestMethod::WilcoxonNormalApprox)
        tests = {TestMethod::TPooled, TestMethod::TWelch};

    fs::create_directories(args.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<SummaryRow> rows;
    std::vector<std::string> qq_lines;
    std::vector<std::string> per_var_lines;
    for (FissionMode mode : modes) {
        for (TestMethod test : tests) {
            ScenarioConfig run_cfg = cfg;
            run_cfg.fission_mode = mode;
            run_cfg.test = test;
            const ExperimentDetail detail =
                run_experiment_detailed(run_cfg, args.workers);
            const ExperimentSummary summary = summarize(detail);
            rows.insert(rows.end(), summary.rows.begin(), summary.rows.end());
            if (args.qq) {
                for (std::size_t pi = 0; pi < detail.grid.size(); ++pi) {
                    std::vector<double> pooled;
                    for (const auto& r : detail.results[pi])
                        for (double p : r.p_values) pooled.push_back(p);
                    if (pooled.empty()) continue;
                    for (const auto& [exp, obs] : qq_uniform(pooled)) {
                        const GridPoint& pt = detail.grid[pi];
                        qq_lines.push_back(run_cfg.name + "," + mode_name(mode) + "," +
                                           test_name(test) + "," +
                                           format_double(pt.tau) + "," +
                                           std::to_string(pt.n) + "," +
                                           format_double(pt.bias) + "," +
                                           format_double(pt.rho) + "," +
                                           format_double(exp) + "," +
                                           format_double(obs));
                    }
                }
            }
            if (args.per_variable) {
                for (std::size_t pi = 0; pi < detail.grid.size(); ++pi) {
                    const GridPoint& pt = detail.grid[pi];
                    const std::size_t p = run_cfg.mixture.dim();
                    for (std::size_t j = 0; j < p; ++j) {
                        std::vector<double> pv;
                        for (const auto& r : detail.results[pi])
                            if (!r.failed && j < r.p_values.size())
                                pv.push_back(r.p_values[j]);
                        if (pv.empty()) continue;
                        per_var_lines.push_back(
                            run_cfg.name + "," + mode_name(mode) + "," +
                            test_name(test) + "," + format_double(pt.tau) + "," +
                            std::to_string(pt.n) + "," + format_double(pt.bias) + "," +
                            format_double(pt.rho) + "," + std::to_string(j + 1) + "," +
                            format_double(rejection_rate(pv, run_cfg.alpha)));
                    }
                }
            }
        }
    }

    const fs::path summary_path = fs::path(args.out_dir) / "summary.csv";
    write_results(rows, summary_path.string(), ResultFormat::CSV);
    if (args.qq) {
        std::ofstream qqf(fs::path(args.out_dir) / "qq.csv", std::ios::binary);
        qqf << "scenario,mode,test,tau,n,bias,rho,expected,observed\n";
        for (const auto& l : qq_lines) qqf << l << '\n';
    }
    if (args.per_variable) {
        std::ofstream pvf(fs::path(args.out_dir) / "per_variable.csv",
                          std::ios::binary);
        pvf << "scenario,mode,test,tau,n,bias,rho,variable,rejection_rate\n";
        for (const auto& l : per_var_lines) pvf << l << '\n';
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::map<std::string, std::size_t> counts{{"summary.csv", rows.size()}};
    nlohmann::json manifest = make_manifest(cfg, args.workers, counts, secs);
    manifest["modes_run"] = nlohmann::json::array();
    for (FissionMode m : modes) manifest["modes_run"].push_back(mode_name(m));
    write_json(manifest, fs::path(args.out_dir) / "manifest.json");

    std::cout << "wrote " << rows.size() << " summary rows to "
              << summary_path.string() << " (" << format_double(secs) << "s)\n";
    return 0;
}

int cmd_theory_type1(double sigma2, double tau, std::vector<double> bias,
                     std::vector<std::size_t> ns, double alpha,
                     const std::string& variant, const std::string& out_file) {
    std::ostringstream os;
    os << "sigma2,tau,bias,rho,n,alpha,variant,type1\n";
    for (std::size_t n : ns) {
        for (double b : bias) {
            const BiasSpec spec{sigma2, sigma2 * (1.0 + b), tau};
            const double rho = rho_fission(spec);
            auto emit = [&](const char* name, double v) {
                os << format_double(sigma2) << ',' << format_double(tau) << ','
                   << format_double(b) << ',' << format_double(rho) << ',' << n << ','
                   << format_double(alpha) << ',' << name << ',' << format_double(v)
                   << '\n';
            };
            if (variant == "z" || variant == "both") emit("z", type1_z(rho, n, alpha));
            if (variant == "t" || variant == "both") emit("t", type1_t(rho, n, alpha));
        }
    }
    if (out_file.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_file, std::ios::binary);
        if (!f) throw IOError("cannot write " + out_file);
        f << os.str();
    }
    return 0;
}

void print_matrix_csv(const Matrix& m, std::ostream& os) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j)
            os << (j ? "," : "") << format_double(m(i, j));
        os << '\n';
    }
}

int cmd_theory_cov(const std::string& method, double mu, double theta,
                   double theta_hat, double tau, double sigma2, double b2,
                   const std::string& sigma_file, const std::string& sigma_hat_file,
                   const std::string& mixture_file) {
    if (method == "nbthin") {
        std::cout << format_double(cov_nb_thin(mu, theta, theta_hat, tau)) << '\n';
        return 0;
    }
    if (method == "prop1" || method == "eq2") {
        CovMatrix a, b;
        if (!sigma_file.empty() && !sigma_hat_file.empty()) {
            a = CovMatrix(read_numeric_csv(sigma_file));
            b = CovMatrix(read_numeric_csv(sigma_hat_file));
        } else {
            a = CovMatrix::scaled_identity(1, sigma2);
            b = CovMatrix::scaled_identity(1, b2);
        }
        // prop1: Sigma - Sigma_hat;  eq2: Sigma_g - Sigma.
        const CovMatrix out = method == "prop1" ? cov_prop1(a, b)
                                                : cov_marginal_fission_conditional(a, b);
        print_matrix_csv(out.matrix(), std::cout);
        return 0;
    }
    if (method == "eq1" || method == "table") {
        if (mixture_file.empty())
            throw ConfigError("--mixture <json> is required for method " + method);
        std::ifstream in(mixture_file);
        if (!in) throw IOError("cannot open " + mixture_file);
        nlohmann::json j;
        in >> j;
        const MixtureSpec spec = mixture_from_json(j);
        if (method == "eq1") {
            print_matrix_csv(cov_conditional_fission(spec).matrix(), std::cout);
            return 0;
        }
        const FissionCovarianceSummary s = covariance_summary(spec);
        std::cout << "# conditional fission, marginal Cov(X1,X2)\n";
        print_matrix_csv(s.conditional_fission_marginal.matrix(), std::cout);
        std::cout << "# conditional fission, within-component Cov(X1,X2|Z=g)\n";
        print_matrix_csv(s.conditional_fission_within.matrix(), std::cout);
        std::cout << "# marginal fission, marginal Cov(X1,X2)\n";
        print_matrix_csv(s.marginal_fission_marginal.matrix(), std::cout);
        for (std::size_t g = 0; g < s.marginal_fission_within.size(); ++g) {
            std::cout << "# marginal fission, within-component g=" << (g + 1) << '\n';
            print_matrix_csv(s.marginal_fission_within[g].matrix(), std::cout);
        }
        return 0;
    }
    throw ConfigError("unknown theory cov method: " + method);
}

struct DecomposeArgs {
    std::string input;
    std::string method;
    double tau = 0.5;
    std::string scale = "auto";
    std::string labels_file;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool transpose = false;
};

int cmd_decompose(const DecomposeArgs& args) {
    const bool gaussian =
        args.method == "gauss-fission" || args.method == "gauss-thin";
    CountMatrix m;
    if (gaussian)
        m = read_real_matrix_csv(args.input, args.transpose);
    else
        m = read_counts(args.input, CountFormat::CSV, args.transpose);

    std::vector<int> labels;
    if (!args.labels_file.empty()) {
        labels = read_labels(args.labels_file);
        if (labels.size() != m.n_cells())
            throw LabelError("labels length does not match the number of rows");
    }

    Seed seed{args.seed ? *args.seed : env_seed().value_or(20250801)};

    ScalePlugin plugin;
    if (args.method != "poisson-thin") {
        if (args.scale == "auto") {
            if (gaussian) {
                if (labels.empty())
                    plugin = ScalePlugin::marginal_cov(empirical_cov(m.values));
                else
                    plugin = ScalePlugin::conditional_cov(
                        per_component_cov(m.values, labels), labels);
            } else {
                if (labels.empty()) {
                    std::vector<double> theta(m.n_genes());
                    for (std::size_t j = 0; j < m.n_genes(); ++j) {
                        try {
                            theta[j] = nb_mle(m.values.col(j)).theta_hat;
                        } catch (const Error&) {
                            theta[j] = THETA_CAP;
                        }
                    }
                    plugin = ScalePlugin::marginal_theta(std::move(theta));
                } else {
                    const auto fits = per_component_nb_mle(m.values, labels);
                    std::vector<std::vector<double>> theta;
                    for (const auto& comp : fits) {
                        std::vector<double> row;
                        for (const auto& f : comp) row.push_back(f.theta_hat);
                        theta.push_back(std::move(row));
                    }
                    plugin = ScalePlugin::conditional_theta(std::move(theta), labels);
                }
            }
        } else {
            // Scale from file: p x p covariance, or one row of per-gene
            // thetas (a single value broadcasts). Marginal mode only.
            const Matrix s = read_numeric_csv(args.scale);
            if (gaussian) {
                plugin = ScalePlugin::marginal_cov(CovMatrix(s));
            } else {
                std::vector<double> theta(s.row(0).begin(), s.row(0).end());
                plugin = ScalePlugin::marginal_theta(std::move(theta));
            }
        }
    }

    FissionPair pair;
    if (args.method == "gauss-fission")
        pair = gaussian_fission(m.values, args.tau, plugin, seed);
    else if (args.method == "gauss-thin")
        pair = gaussian_thin(m.values, args.tau, plugin, seed);
    else if (args.method == "poisson-thin")
        pair = poisson_thin(m.values, args.tau, seed);
    else if (args.method == "nb-thin")
        pair = nb_thin(m.values, args.tau, plugin, seed);
    else
        throw ConfigError("unknown decompose method: " + args.method);

    fs::create_directories(args.out_dir);
    write_matrix_csv(pair.x1, m.cell_ids, m.gene_ids,
                     (fs::path(args.out_dir) / "x1.csv").string());
    write_matrix_csv(pair.x2, m.cell_ids, m.gene_ids,
                     (fs::path(args.out_dir) / "x2.csv").string());
    nlohmann::json manifest;
    manifest["artifact"] = "fissionlab";
    manifest["version"] = FISSIONLAB_VERSION;
    manifest["command"] = "decompose";
    manifest["input"] = args.input;
    manifest["method"] = args.method;
    manifest["tau"] = args.tau;
    manifest["scale"] = args.scale;
    manifest["seed"] = seed.value;
    manifest["rows"] = m.n_cells();
    manifest["cols"] = m.n_genes();
    write_json(manifest, fs::path(args.out_dir) / "manifest.json");
    std::cout << "wrote x1.csv and x2.csv to " << args.out_dir << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string counts;
    std::string format = "csv";
    double tau = 0.5;
    std::string scope = "uni";
    std::string labels_file;
    std::size_t k = 2;
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool transpose = false;
    std::optional<double> max_zero_frac;
    std::optional<double> min_variance;
    std::optional<std::size_t> top_variable;
};

int cmd_analyze(const AnalyzeArgs& args) {
    const CountFormat fmt =
        args.format == "mtx" ? CountFormat::MatrixMarket : CountFormat::CSV;
    CountMatrix m = read_counts(args.counts, fmt, args.transpose);
    if (args.max_zero_frac) m = filter_cells_max_zero_frac(m, *args.max_zero_frac);
    if (args.min_variance)
        m = filter_genes(m, GeneFilterRule::min_variance(*args.min_variance));
    if (args.top_variable)
        m = filter_genes(m, GeneFilterRule::top_variable(*args.top_variable));
    if (m.n_cells() < 4 || m.n_genes() < 1)
        throw InsufficientDataError("too few cells or genes after filtering");

    AnalyzeOptions opt;
    opt.tau = args.tau;
    opt.k_cluster = args.k;
    opt.alpha = args.alpha;
    opt.scope = args.scope == "multi" ? ClusteringScope::Multivariate
                                      : ClusteringScope::Univariate;
    opt.seed = Seed{args.seed ? *args.seed : env_seed().value_or(20250801)};
    if (!args.labels_file.empty()) opt.labels = read_labels(args.labels_file);

    const AnalyzeResult res = analyze_counts(m, opt);

    fs::create_directories(args.out_dir);
    {
        std::ofstream f(fs::path(args.out_dir) / "results.csv", std::ios::binary);
        f << "gene_id,theta_hat,ari,p_value\n";
        for (const auto& g : res.genes)
            f << g.gene_id << ',' << format_double(g.theta_hat) << ','
              << format_double(g.ari) << ',' << format_double(g.p_value) << '\n';
    }
    {
        std::ofstream f(fs::path(args.out_dir) / "crosscor.csv", std::ios::binary);
        f << "gene_id,cor_original,cor_crosspart\n";
        for (const auto& c : res.cross_cor)
            f << c.gene_id << ',' << format_double(c.cor_original) << ','
              << format_double(c.cor_crosspart) << '\n';
    }
    if (!res.conditional_theta.empty()) {
        std::ofstream f(fs::path(args.out_dir) / "conditional_theta.csv",
                        std::ios::binary);
        f << "gene_id,component,theta_hat\n";
        for (std::size_t g = 0; g < res.conditional_theta.size(); ++g)
            for (std::size_t j = 0; j < res.conditional_theta[g].size(); ++j)
                f << m.gene_ids[j] << ',' << (g + 1) << ','
                  << format_double(res.conditional_theta[g][j]) << '\n';
    }
    nlohmann::json manifest;
    manifest["artifact"] = "fissionlab";
    manifest["version"] = FISSIONLAB_VERSION;
    manifest["command"] = "analyze";
    manifest["counts"] = args.counts;
    manifest["tau"] = args.tau;
    manifest["scope"] = args.scope;
    manifest["k_cluster"] = args.k;
    manifest["alpha"] = args.alpha;
    manifest["seed"] = opt.seed.value;
    manifest["cells"] = m.n_cells();
    manifest["genes"] = m.n_genes();
    manifest["rejection_rate"] = res.rejection_rate_alpha;
    manifest["conventions"] = {{"rejection_rule", "p <= alpha"}};
    write_json(manifest, fs::path(args.out_dir) / "manifest.json");

    std::cout << "genes: " << m.n_genes() << "  cells: " << m.n_cells()
              << "  rejection rate at alpha=" << format_double(args.alpha) << ": "
              << format_double(res.rejection_rate_alpha) << '\n';
    return 0;
}

int cmd_scenarios_list() {
    for (const auto& cfg : builtin_scenarios()) {
        std::cout << cfg.name << "  kind=" << kind_name(cfg.kind)
                  << " test=" << test_name(cfg.test)
                  << " scope=" << scope_name(cfg.clustering_scope)
                  << " replicates=" << cfg.replicates << " grid=" << cfg.tau_grid.size()
                  << "tau x " << cfg.n_grid.size() << "n";
        if (!cfg.bias_grid.empty()) std::cout << " x " << cfg.bias_grid.size() << "bias";
        if (!cfg.rho_grid.empty()) std::cout << " x " << cfg.rho_grid.size() << "rho";
        std::cout << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fissionlab: data fission / thinning simulation toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a scenario and write summary CSVs");
    simulate->add_option("--scenario", sim.scenario, "builtin name or config.json path")
        ->required();
    std::size_t rep_opt = 0;
    auto* rep_flag = simulate->add_option("--replicates", rep_opt, "override replicate count");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = simulate->add_option("--seed", seed_opt, "master seed override");
    simulate->add_option("--workers", sim.workers, "worker threads (0 = hardware)");
    simulate->add_option("--out", sim.out_dir, "output directory");
    simulate->add_option("--mode", sim.mode,
                         "fission mode: marginal|conditional|both|config");
    simulate->add_flag("--qq", sim.qq, "also write pooled p-value QQ pairs");
    simulate->add_flag("--both-t-variants", sim.both_t_variants,
                       "run pooled and Welch t variants (t scenarios only)");
    simulate->add_flag("--per-variable", sim.per_variable,
                       "also write per-variable rejection rates");

    auto* theory = app.add_subcommand("theory", "closed-form quantities");
    theory->require_subcommand(1);
    double th_sigma2 = 1.0, th_tau = 1.0, th_alpha = 0.05;
    std::vector<double> th_bias{0.0};
    std::vector<std::size_t> th_n{100};
    std::string th_variant = "both", th_out;
    auto* t1 = theory->add_subcommand("type1", "analytic Type I error vs relative bias");
    t1->add_option("--sigma2", th_sigma2, "true variance");
    t1->add_option("--tau", th_tau, "fission tuning parameter");
    t1->add_option("--bias", th_bias, "relative bias grid")->delimiter(',');
    t1->add_option("--n", th_n, "sample size grid")->delimiter(',');
    t1->add_option("--alpha", th_alpha, "nominal level");
    t1->add_option("--variant", th_variant, "z|t|both");
    t1->add_option("--out", th_out, "output file (default stdout)");

    std::string cov_method = "nbthin";
    double cov_mu = 5.0, cov_theta = 5.0, cov_theta_hat = 5.0, cov_tau = 0.5;
    double cov_sigma2 = 1.0, cov_b2 = 1.0;
    std::string cov_sigma_file, cov_sigma_hat_file, cov_mixture_file;
    auto* covc = theory->add_subcommand("cov", "covariance identities");
    covc->add_option("--method", cov_method, "prop1|eq1|eq2|nbthin|table")->required();
    covc->add_option("--mu", cov_mu, "NB mean");
    covc->add_option("--theta", cov_theta, "true overdispersion");
    covc->add_option("--theta-hat", cov_theta_hat, "plug-in overdispersion");
    covc->add_option("--tau", cov_tau, "thinning parameter");
    covc->add_option("--sigma2", cov_sigma2, "true variance (1-D)");
    covc->add_option("--b2", cov_b2, "plug-in variance (1-D)");
    covc->add_option("--sigma-file", cov_sigma_file, "CSV matrix: Sigma (or Sigma_g for eq2)");
    covc->add_option("--sigma-hat-file", cov_sigma_hat_file,
                     "CSV matrix: Sigma_hat (or Sigma for eq2)");
    covc->add_option("--mixture", cov_mixture_file, "mixture JSON for eq1/table");

    DecomposeArgs dec;
    auto* decompose = app.add_subcommand("decompose", "split one data file into x1/x2");
    decompose->add_option("--input", dec.input, "input matrix CSV")->required();
    decompose->add_option("--method", dec.method,
                          "gauss-fission|gauss-thin|poisson-thin|nb-thin")
        ->required();
    decompose->add_option("--tau", dec.tau, "tuning parameter")->required();
    decompose->add_option("--scale", dec.scale, "auto | scale file (CSV)");
    decompose->add_option("--labels", dec.labels_file, "per-row labels for conditional scale");
    std::uint64_t dec_seed = 0;
    auto* dec_seed_flag = decompose->add_option("--seed", dec_seed, "seed override");
    decompose->add_option("--out", dec.out_dir, "output directory");
    decompose->add_flag("--transpose", dec.transpose, "input has genes as rows");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "gene-wise NB thinning analysis");
    analyze->add_option("--counts", an.counts, "count matrix file")->required();
    analyze->add_option("--format", an.format, "csv|mtx");
    analyze->add_option("--tau", an.tau, "thinning parameter");
    analyze->add_option("--scope", an.scope, "multi|uni");
    analyze->add_option("--labels", an.labels_file, "true population labels");
    analyze->add_option("--k", an.k, "number of clusters");
    analyze->add_option("--alpha", an.alpha, "rejection level");
    std::uint64_t an_seed = 0;
    auto* an_seed_flag = analyze->add_option("--seed", an_seed, "seed override");
    analyze->add_option("--out", an.out_dir, "output directory");
    analyze->add_flag("--transpose", an.transpose, "input has genes as rows");
    double an_zero = 0.0, an_minvar = 0.0;
    std::size_t an_topk = 0;
    auto* zf = analyze->add_option("--max-zero-frac", an_zero,
                                   "drop cells with a higher zero fraction");
    auto* mv = analyze->add_option("--min-variance", an_minvar,
                                   "drop genes below this variance");
    auto* tk = analyze->add_option("--top-variable", an_topk, "keep k most variable genes");

    auto* scenarios = app.add_subcommand("scenarios", "builtin scenario catalog");
    auto* sc_list = scenarios->add_subcommand("list", "list builtin scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : EXIT_CONFIG;
    }

    try {
        if (*simulate) {
            if (*rep_flag) sim.replicates = rep_opt;
            if (*seed_flag) sim.seed = seed_opt;
            return cmd_simulate(sim);
        }
        if (*t1) return cmd_theory_type1(th_sigma2, th_tau, th_bias, th_n, th_alpha,
                                         th_variant, th_out);
        if (*covc)
            return cmd_theory_cov(cov_method, cov_mu, cov_theta, cov_theta_hat, cov_tau,
                                  cov_sigma2, cov_b2, cov_sigma_file,
                                  cov_sigma_hat_file, cov_mixture_file);
        if (*decompose) {
            if (*dec_seed_flag) dec.seed = dec_seed;
            return cmd_decompose(dec);
        }
        if (*analyze) {
            if (*an_seed_flag) an.seed = an_seed;
            if (*zf) an.max_zero_frac = an_zero;
            if (*mv) an.min_variance = an_minvar;
            if (*tk) an.top_variable = an_topk;
            return cmd_analyze(an);
        }
        if (*sc_list || *scenarios) return cmd_scenarios_list();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return EXIT_CONFIG;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return EXIT_CONFIG;
    } catch (const RangeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return EXIT_CONFIG;
    } catch (const ConvergenceError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return EXIT_NUMERIC;
    } catch (const DomainError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return EXIT_NUMERIC;
    } catch (const DecompositionError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return EXIT_NUMERIC;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return EXIT_DATA;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return EXIT_CONFIG;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
