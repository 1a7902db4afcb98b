#ifndef FISSIONLAB_IO_HPP
#define FISSIONLAB_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fissionlab/decompose.hpp"
#include "fissionlab/errors.hpp"
#include "fissionlab/estimate.hpp"
#include "fissionlab/harness.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/stattest.hpp"

namespace fissionlab {

inline constexpr const char* FISSIONLAB_VERSION = "0.1.0";

// ---- number formatting -------------------------------------------------------

// Shortest representation that parses back to the same double; NaN becomes an
// empty CSV field.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double_field(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("cannot parse number: '" + s + "'");
    return v;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

} // namespace detail

// ---- count matrices ----------------------------------------------------------

struct CountMatrix {
    Matrix values; // n_cells x n_genes
    std::vector<std::string> cell_ids;
    std::vector<std::string> gene_ids;

    std::size_t n_cells() const { return values.rows(); }
    std::size_t n_genes() const { return values.cols(); }

    void validate() const {
        if (cell_ids.size() != values.rows() || gene_ids.size() != values.cols())
            throw DimMismatchError("count matrix ids do not match its shape");
        std::set<std::string> seen;
        for (const auto& id : cell_ids)
            if (!seen.insert(id).second)
                throw DuplicateIdError("duplicate cell id: " + id);
        seen.clear();
        for (const auto& id : gene_ids)
            if (!seen.insert(id).second)
                throw DuplicateIdError("duplicate gene id: " + id);
        for (double v : values.data()) {
            if (v < 0.0) throw NegativeEntryError("negative count entry");
            if (v != std::floor(v)) throw NegativeEntryError("non-integer count entry");
        }
    }

    CountMatrix transposed() const {
        CountMatrix out;
        out.values = Matrix(values.cols(), values.rows());
        for (std::size_t i = 0; i < values.rows(); ++i)
            for (std::size_t j = 0; j < values.cols(); ++j)
                out.values(j, i) = values(i, j);
        out.cell_ids = gene_ids;
        out.gene_ids = cell_ids;
        return out;
    }
};

enum class CountFormat { CSV, MatrixMarket };

namespace detail {

// Layout: header row "id,gene1,gene2,...", then one row per cell starting
// with its id. Values may be real; the caller decides whether to require
// integer counts.
struct CsvMatrix {
    Matrix values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
};

inline CsvMatrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    CsvMatrix out;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    ++lineno;
    const auto header = split_csv_line(strip_cr(line));
    if (header.size() < 2)
        throw ParseError(path + ":1: header needs an id column and one gene");
    out.col_ids.assign(header.begin() + 1, header.end());

    std::vector<double> data;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        out.row_ids.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            double v;
            try {
                v = parse_double_field(fields[j]);
            } catch (const ParseError&) {
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": bad numeric field '" + fields[j] + "'");
            }
            data.push_back(v);
        }
    }
    out.values = Matrix(out.row_ids.size(), out.col_ids.size(), std::move(data));
    return out;
}

inline std::vector<std::string> read_id_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

inline CountMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    ++lineno;
    line = strip_cr(line);
    if (line.rfind("%%MatrixMarket", 0) != 0 ||
        line.find("coordinate") == std::string::npos ||
        line.find("integer") == std::string::npos)
        throw ParseError(path + ":1: expected MatrixMarket coordinate integer header");
    // Skip comments.
    std::size_t rows = 0, cols = 0, nnz = 0;
    for (;;) {
        if (!std::getline(in, line))
            throw ParseError(path + ": missing size line");
        ++lineno;
        line = strip_cr(line);
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz))
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad size line");
        break;
    }
    CountMatrix out;
    out.values = Matrix(rows, cols);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        long long r, c;
        double v;
        if (!(ss >> r >> c >> v))
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad entry line");
        if (r < 1 || c < 1 || r > static_cast<long long>(rows) ||
            c > static_cast<long long>(cols))
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": coordinate outside matrix");
        if (v < 0.0) throw NegativeEntryError(path + ":" + std::to_string(lineno) +
                                              ": negative count");
        out.values(static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1)) += v;
        ++seen;
    }
    if (seen != nnz)
        throw ParseError(path + ": entry count " + std::to_string(seen) +
                         " does not match header " + std::to_string(nnz));
    out.cell_ids = read_id_lines(path + ".rows");
    out.gene_ids = read_id_lines(path + ".cols");
    if (out.cell_ids.empty())
        for (std::size_t i = 0; i < rows; ++i)
            out.cell_ids.push_back("cell_" + std::to_string(i + 1));
    if (out.gene_ids.empty())
        for (std::size_t j = 0; j < cols; ++j)
            out.gene_ids.push_back("gene_" + std::to_string(j + 1));
    return out;
}

} // namespace detail

// Rows are cells, columns are genes; set transpose for genes-as-rows files.
inline CountMatrix read_counts(const std::string& path, CountFormat format,
                               bool transpose = false) {
    CountMatrix out;
    if (format == CountFormat::CSV) {
        detail::CsvMatrix csv = detail::read_csv_matrix(path);
        out.values = std::move(csv.values);
        out.cell_ids = std::move(csv.row_ids);
        out.gene_ids = std::move(csv.col_ids);
    } else {
        out = detail::read_matrix_market(path);
    }
    if (transpose) out = out.transposed();
    out.validate();
    return out;
}

// Real-valued matrix in the counts CSV layout (for Gaussian decompositions).
inline CountMatrix read_real_matrix_csv(const std::string& path,
                                        bool transpose = false) {
    detail::CsvMatrix csv = detail::read_csv_matrix(path);
    CountMatrix out;
    out.values = std::move(csv.values);
    out.cell_ids = std::move(csv.row_ids);
    out.gene_ids = std::move(csv.col_ids);
    if (transpose) out = out.transposed();
    return out;
}

inline void write_matrix_csv(const Matrix& values,
                             const std::vector<std::string>& row_ids,
                             const std::vector<std::string>& col_ids,
                             const std::string& path,
                             const std::string& corner = "id") {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw IOError("cannot write " + path);
    outf << corner;
    for (const auto& id : col_ids) outf << ',' << id;
    outf << '\n';
    for (std::size_t i = 0; i < values.rows(); ++i) {
        outf << row_ids[i];
        for (std::size_t j = 0; j < values.cols(); ++j)
            outf << ',' << format_double(values(i, j));
        outf << '\n';
    }
}

inline void write_counts_csv(const CountMatrix& m, const std::string& path) {
    write_matrix_csv(m.values, m.cell_ids, m.gene_ids, path);
}

// One integer label per line, 1-based.
inline std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        int v = 0;
        const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
        if (res.ec != std::errc{} || res.ptr != line.data() + line.size())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": bad label '" + line + "'");
        labels.push_back(v);
    }
    return labels;
}

// ---- gene filtering ------------------------------------------------------------

struct GeneFilterRule {
    enum class Kind { MinVariance, TopVariable } kind = Kind::MinVariance;
    double threshold = 0.0;
    std::size_t k = 0;

    static GeneFilterRule min_variance(double threshold) {
        return GeneFilterRule{Kind::MinVariance, threshold, 0};
    }
    static GeneFilterRule top_variable(std::size_t k) {
        return GeneFilterRule{Kind::TopVariable, 0.0, k};
    }
};

// Subsets genes preserving cell order and original gene order. TopVariable
// ranks by sample variance with ties broken by gene id.
inline CountMatrix filter_genes(const CountMatrix& m, const GeneFilterRule& rule) {
    const std::size_t p = m.n_genes();
    std::vector<double> var(p);
    for (std::size_t j = 0; j < p; ++j) {
        const std::vector<double> col = m.values.col(j);
        var[j] = variance_of(col);
    }
    std::vector<std::size_t> keep;
    if (rule.kind == GeneFilterRule::Kind::MinVariance) {
        for (std::size_t j = 0; j < p; ++j)
            if (var[j] >= rule.threshold) keep.push_back(j);
    } else {
        if (rule.k > p)
            throw RangeError("TopVariable k exceeds the number of genes");
        std::vector<std::size_t> order(p);
        for (std::size_t j = 0; j < p; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (var[a] != var[b]) return var[a] > var[b];
            return m.gene_ids[a] < m.gene_ids[b];
        });
        keep.assign(order.begin(), order.begin() + static_cast<long>(rule.k));
        std::sort(keep.begin(), keep.end()); // restore original column order
    }
    CountMatrix out;
    out.cell_ids = m.cell_ids;
    out.values = Matrix(m.n_cells(), keep.size());
    for (std::size_t jj = 0; jj < keep.size(); ++jj) {
        out.gene_ids.push_back(m.gene_ids[keep[jj]]);
        for (std::size_t i = 0; i < m.n_cells(); ++i)
            out.values(i, jj) = m.values(i, keep[jj]);
    }
    return out;
}

// Drops cells whose fraction of zero counts exceeds max_zero_frac.
inline CountMatrix filter_cells_max_zero_frac(const CountMatrix& m,
                                              double max_zero_frac) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.n_cells(); ++i) {
        std::size_t zeros = 0;
        for (std::size_t j = 0; j < m.n_genes(); ++j)
            if (m.values(i, j) == 0.0) ++zeros;
        if (static_cast<double>(zeros) / static_cast<double>(m.n_genes()) <=
            max_zero_frac)
            keep.push_back(i);
    }
    CountMatrix out;
    out.gene_ids = m.gene_ids;
    out.values = Matrix(keep.size(), m.n_genes());
    for (std::size_t ii = 0; ii < keep.size(); ++ii) {
        out.cell_ids.push_back(m.cell_ids[keep[ii]]);
        for (std::size_t j = 0; j < m.n_genes(); ++j)
            out.values(ii, j) = m.values(keep[ii], j);
    }
    return out;
}

// ---- count-matrix analysis pipeline --------------------------------------------

struct AnalyzeOptions {
    double tau = 0.5;
    std::size_t k_cluster = 2;
    ClusteringScope scope = ClusteringScope::Univariate;
    std::vector<int> labels; // optional true populations, 1-based
    double alpha = 0.05;
    Seed seed{20250801};
    TestMethod test = TestMethod::WilcoxonNormalApprox;
    KMeansOptions kmeans;
};

struct GeneResult {
    std::string gene_id;
    double theta_hat = THETA_CAP; // marginal profile MLE
    double ari = std::numeric_limits<double>::quiet_NaN();
    double p_value = 1.0;
};

struct CrossCorRow {
    std::string gene_id;
    double cor_original = 0.0;  // Cor(X_1, X_j)
    double cor_crosspart = 0.0; // Cor(X1^(1), Xj^(2))
};

struct AnalyzeResult {
    std::vector<GeneResult> genes;
    std::vector<CrossCorRow> cross_cor;
    // Per-component theta estimates when labels were provided: [component][gene].
    std::vector<std::vector<double>> conditional_theta;
    double rejection_rate_alpha = 0.0;
};

namespace detail {

inline double safe_theta_mle(const std::vector<double>& col) {
    try {
        return nb_mle(col).theta_hat;
    } catch (const Error&) {
        return THETA_CAP; // constant or all-zero gene
    }
}

} // namespace detail

// Gene-wise NB thinning analysis: fit theta (marginal, or per component when
// labels are given), thin, cluster X1 (whole matrix or per gene), test each
// gene on X2, and report the residual cross-part correlations against gene 1.
inline AnalyzeResult analyze_counts(const CountMatrix& m, const AnalyzeOptions& opt) {
    m.validate();
    if (!(opt.tau > 0.0 && opt.tau < 1.0))
        throw ConfigError("analyze_counts needs tau in (0,1)");
    const std::size_t n = m.n_cells(), p = m.n_genes();
    if (!opt.labels.empty() && opt.labels.size() != n)
        throw LabelError("labels length does not match the number of cells");

    AnalyzeResult out;
    out.genes.resize(p);
    std::vector<double> marginal_theta(p);
    for (std::size_t j = 0; j < p; ++j) {
        marginal_theta[j] = detail::safe_theta_mle(m.values.col(j));
        out.genes[j].gene_id = m.gene_ids[j];
        out.genes[j].theta_hat = marginal_theta[j];
    }

    ScalePlugin plugin;
    if (opt.labels.empty()) {
        plugin = ScalePlugin::marginal_theta(marginal_theta);
    } else {
        int G = 0;
        for (int l : opt.labels) G = std::max(G, l);
        std::vector<std::vector<double>> cond(static_cast<std::size_t>(G),
                                              std::vector<double>(p, THETA_CAP));
        for (int g = 1; g <= G; ++g) {
            std::vector<double> col;
            for (std::size_t j = 0; j < p; ++j) {
                col.clear();
                for (std::size_t i = 0; i < n; ++i)
                    if (opt.labels[i] == g) col.push_back(m.values(i, j));
                cond[static_cast<std::size_t>(g - 1)][j] = detail::safe_theta_mle(col);
            }
        }
        out.conditional_theta = cond;
        plugin = ScalePlugin::conditional_theta(std::move(cond), opt.labels);
    }

    const FissionPair pair =
        nb_thin(m.values, opt.tau, plugin, derive_seed(opt.seed, 0x7468696eULL));
    const Seed cluster_seed = derive_seed(opt.seed, 0x636c7573ULL);

    if (opt.scope == ClusteringScope::Multivariate) {
        const KMeansResult km = kmeans(pair.x1, opt.k_cluster, cluster_seed, opt.kmeans);
        // Compare the two largest clusters.
        std::vector<std::size_t> sz(opt.k_cluster, 0);
        for (int l : km.labels) ++sz[static_cast<std::size_t>(l - 1)];
        std::size_t a = 0, b = 1;
        for (std::size_t c = 1; c < opt.k_cluster; ++c)
            if (sz[c] > sz[a]) a = c;
        b = (a == 0) ? 1 : 0;
        for (std::size_t c = 0; c < opt.k_cluster; ++c)
            if (c != a && sz[c] > sz[b]) b = c;
        const std::pair<int, int> cl_pair{static_cast<int>(std::min(a, b)) + 1,
                                          static_cast<int>(std::max(a, b)) + 1};
        const std::vector<double> pvals =
            detail::test_pair_per_variable(pair.x2, km.labels, cl_pair, opt.test);
        const double shared_ari =
            opt.labels.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : adjusted_rand_index(km.labels, opt.labels);
        for (std::size_t j = 0; j < p; ++j) {
            out.genes[j].p_value = pvals[j];
            out.genes[j].ari = shared_ari;
        }
    } else {
        for (std::size_t j = 0; j < p; ++j) {
            Matrix col(n, 1);
            for (std::size_t i = 0; i < n; ++i) col(i, 0) = pair.x1(i, j);
            const KMeansResult km = kmeans(col, opt.k_cluster,
                                           derive_seed(cluster_seed, j), opt.kmeans);
            std::vector<double> a, b;
            for (std::size_t i = 0; i < n; ++i) {
                if (km.labels[i] == 1) a.push_back(pair.x2(i, j));
                if (km.labels[i] == 2) b.push_back(pair.x2(i, j));
            }
            try {
                out.genes[j].p_value = detail::run_test(opt.test, a, b).p_value;
            } catch (const Error&) {
                out.genes[j].p_value = 1.0;
            }
            if (!opt.labels.empty())
                out.genes[j].ari = adjusted_rand_index(km.labels, opt.labels);
        }
    }

    // Residual dependence diagnostics against the first gene.
    const std::vector<double> x_first = m.values.col(0);
    const std::vector<double> x1_first = pair.x1.col(0);
    out.cross_cor.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const std::vector<double> xj = m.values.col(j);
        const std::vector<double> x2j = pair.x2.col(j);
        out.cross_cor[j] = CrossCorRow{m.gene_ids[j], correlation_of(x_first, xj),
                                       correlation_of(x1_first, x2j)};
    }

    std::vector<double> pvals(p);
    for (std::size_t j = 0; j < p; ++j) pvals[j] = out.genes[j].p_value;
    out.rejection_rate_alpha = rejection_rate(pvals, opt.alpha);
    return out;
}

// ---- result serialization -------------------------------------------------------

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols = {
        "scenario", "kind", "tau", "n", "bias", "rho", "mode",
        "test", "metric", "value", "se", "replicates", "seed"};
    return cols;
}

enum class ResultFormat { CSV, JSONLines };

inline void write_results(const std::vector<SummaryRow>& rows, const std::string& path,
                          ResultFormat format = ResultFormat::CSV) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    if (format == ResultFormat::CSV) {
        const auto& cols = summary_columns();
        for (std::size_t c = 0; c < cols.size(); ++c)
            out << (c ? "," : "") << cols[c];
        out << '\n';
        for (const auto& r : rows) {
            out << r.scenario << ',' << r.kind << ',' << format_double(r.tau) << ','
                << r.n << ',' << format_double(r.bias) << ',' << format_double(r.rho)
                << ',' << r.mode << ',' << r.test << ',' << r.metric << ','
                << format_double(r.value) << ',' << format_double(r.se) << ','
                << r.replicates << ',' << r.seed << '\n';
        }
        return;
    }
    for (const auto& r : rows) {
        nlohmann::json j;
        j["scenario"] = r.scenario;
        j["kind"] = r.kind;
        j["tau"] = r.tau;
        j["n"] = r.n;
        if (!std::isnan(r.bias)) j["bias"] = r.bias;
        if (!std::isnan(r.rho)) j["rho"] = r.rho;
        j["mode"] = r.mode;
        j["test"] = r.test;
        j["metric"] = r.metric;
        j["value"] = r.value;
        j["se"] = r.se;
        j["replicates"] = r.replicates;
        j["seed"] = r.seed;
        out << j.dump() << '\n';
    }
}

inline std::vector<SummaryRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    std::vector<SummaryRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != summary_columns().size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad row");
        SummaryRow r;
        r.scenario = f[0];
        r.kind = f[1];
        r.tau = parse_double_field(f[2]);
        r.n = static_cast<std::size_t>(parse_double_field(f[3]));
        r.bias = parse_double_field(f[4]);
        r.rho = parse_double_field(f[5]);
        r.mode = f[6];
        r.test = f[7];
        r.metric = f[8];
        r.value = parse_double_field(f[9]);
        r.se = parse_double_field(f[10]);
        r.replicates = static_cast<std::size_t>(parse_double_field(f[11]));
        r.seed = static_cast<std::uint64_t>(std::stoull(f[12]));
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- scenario config JSON -------------------------------------------------------

namespace detail {

inline nlohmann::json cov_to_json(const CovMatrix& cov) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < cov.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < cov.dim(); ++j) row.push_back(cov(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CovMatrix cov_from_json(const nlohmann::json& j) {
    const std::size_t p = j.size();
    Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        if (j[i].size() != p) throw ConfigError("covariance rows must be square");
        for (std::size_t k = 0; k < p; ++k) m(i, k) = j[i][k].get<double>();
    }
    return CovMatrix(std::move(m));
}

} // namespace detail

inline nlohmann::json mixture_to_json(const MixtureSpec& spec) {
    nlohmann::json j;
    j["family"] = spec.family == Family::Gaussian ? "gaussian" : "negbin";
    j["weights"] = spec.weights;
    nlohmann::json comps = nlohmann::json::array();
    if (spec.family == Family::Gaussian) {
        for (const auto& c : spec.gaussian) {
            nlohmann::json cj;
            cj["mean"] = c.mean;
            cj["cov"] = detail::cov_to_json(c.cov);
            comps.push_back(std::move(cj));
        }
    } else {
        for (const auto& c : spec.negbin) {
            nlohmann::json cj;
            cj["mu"] = c.mu;
            cj["theta"] = c.theta;
            comps.push_back(std::move(cj));
        }
    }
    j["components"] = std::move(comps);
    return j;
}

inline MixtureSpec mixture_from_json(const nlohmann::json& j) {
    MixtureSpec spec;
    const std::string family = j.at("family").get<std::string>();
    if (family == "gaussian")
        spec.family = Family::Gaussian;
    else if (family == "negbin")
        spec.family = Family::NegBin;
    else
        throw ConfigError("mixture family must be 'gaussian' or 'negbin'");
    spec.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& cj : j.at("components")) {
        if (spec.family == Family::Gaussian) {
            GaussianComponent c;
            c.mean = cj.at("mean").get<std::vector<double>>();
            c.cov = detail::cov_from_json(cj.at("cov"));
            spec.gaussian.push_back(std::move(c));
        } else {
            NBComponent c;
            c.mu = cj.at("mu").get<std::vector<double>>();
            c.theta = cj.at("theta").get<std::vector<double>>();
            spec.negbin.push_back(std::move(c));
        }
    }
    spec.validate();
    return spec;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["kind"] = kind_name(cfg.kind);
    j["mixture"] = mixture_to_json(cfg.mixture);
    j["tau_grid"] = cfg.tau_grid;
    j["n_grid"] = cfg.n_grid;
    if (!cfg.bias_grid.empty()) j["bias_grid"] = cfg.bias_grid;
    if (!cfg.rho_grid.empty()) j["rho_grid"] = cfg.rho_grid;
    j["k_cluster"] = cfg.k_cluster;
    j["fission_mode"] = mode_name(cfg.fission_mode);
    j["test"] = test_name(cfg.test);
    j["replicates"] = cfg.replicates;
    j["alpha"] = cfg.alpha;
    j["master_seed"] = cfg.master_seed.value;
    j["clustering_scope"] = scope_name(cfg.clustering_scope);
    j["target_components"] = {cfg.target_components.first, cfg.target_components.second};
    if (cfg.h0_genes > 0) j["h0_genes"] = cfg.h0_genes;
    j["kmeans"] = {{"restarts", cfg.kmeans.restarts},
                   {"max_iter", cfg.kmeans.max_iter},
                   {"tol", cfg.kmeans.tol}};
    return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    cfg.name = j.value("name", "custom");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ideal_gaussian") cfg.kind = ScenarioKind::IdealGaussian;
    else if (kind == "adverse_gaussian") cfg.kind = ScenarioKind::AdverseGaussian;
    else if (kind == "bias_sweep") cfg.kind = ScenarioKind::BiasSweep;
    else if (kind == "nb_mixture_split") cfg.kind = ScenarioKind::NBMixtureSplit;
    else if (kind == "nb_correlated") cfg.kind = ScenarioKind::NBCorrelated;
    else if (kind == "two_population_synthetic")
        cfg.kind = ScenarioKind::TwoPopulationSynthetic;
    else throw ConfigError("unknown scenario kind: " + kind);
    cfg.mixture = mixture_from_json(j.at("mixture"));
    cfg.tau_grid = j.at("tau_grid").get<std::vector<double>>();
    cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    cfg.bias_grid = j.value("bias_grid", std::vector<double>{});
    cfg.rho_grid = j.value("rho_grid", std::vector<double>{});
    cfg.k_cluster = j.value("k_cluster", std::size_t{2});
    const std::string mode = j.value("fission_mode", "marginal");
    if (mode == "marginal") cfg.fission_mode = FissionMode::Marginal;
    else if (mode == "conditional_oracle")
        cfg.fission_mode = FissionMode::ConditionalOracle;
    else throw ConfigError("unknown fission_mode: " + mode);
    const std::string test = j.value("test", "t_pooled");
    if (test == "t_pooled") cfg.test = TestMethod::TPooled;
    else if (test == "t_welch") cfg.test = TestMethod::TWelch;
    else if (test == "wilcoxon") cfg.test = TestMethod::WilcoxonNormalApprox;
    else throw ConfigError("unknown test: " + test);
    cfg.replicates = j.value("replicates", std::size_t{1000});
    cfg.alpha = j.value("alpha", 0.05);
    cfg.master_seed = Seed{j.value("master_seed", std::uint64_t{20250801})};
    const std::string scope = j.value("clustering_scope", "multivariate");
    if (scope == "multivariate") cfg.clustering_scope = ClusteringScope::Multivariate;
    else if (scope == "univariate") cfg.clustering_scope = ClusteringScope::Univariate;
    else throw ConfigError("unknown clustering_scope: " + scope);
    if (j.contains("target_components")) {
        cfg.target_components = {j["target_components"][0].get<int>(),
                                 j["target_components"][1].get<int>()};
    }
    cfg.h0_genes = j.value("h0_genes", std::size_t{0});
    if (j.contains("kmeans")) {
        cfg.kmeans.restarts = j["kmeans"].value("restarts", std::size_t{10});
        cfg.kmeans.max_iter = j["kmeans"].value("max_iter", std::size_t{300});
        cfg.kmeans.tol = j["kmeans"].value("tol", 1e-6);
    }
    cfg.validate();
    return cfg;
}

// ---- run manifest ----------------------------------------------------------------

// Everything needed to bit-reproduce a run, plus the design-decision flags
// that pin down otherwise ambiguous conventions.
inline nlohmann::json make_manifest(const ScenarioConfig& cfg, std::size_t workers,
                                    const std::map<std::string, std::size_t>& row_counts,
                                    double wall_clock_sec) {
    nlohmann::json j;
    j["artifact"] = "fissionlab";
    j["version"] = FISSIONLAB_VERSION;
    j["master_seed"] = cfg.master_seed.value;
    j["workers"] = workers;
    j["config"] = scenario_to_json(cfg);
    j["row_counts"] = row_counts;
    j["wall_clock_sec"] = wall_clock_sec;
    j["conventions"] = {
        {"relative_bias", "(b2 - sigma2) / sigma2"},
        {"correlated_nb_generator", "gaussian_copula_equicorrelated"},
        {"rng", "splitmix64_counter"},
        {"rejection_rule", "p <= alpha"},
    };
    return j;
}

} // namespace fissionlab

#endif
