#include "fsir/io.hpp"

#include "fsir/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

namespace fsir {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::optional<double> to_real(const std::string& cell) {
    std::string_view v(cell);
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    if (v.empty()) return std::nullopt;
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
    return out;
}

/// Line reader tracking 1-based line numbers; strips a UTF-8 BOM and CR.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++number_;
        if (number_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    std::size_t number() const { return number_; }

private:
    std::istream& in_;
    std::size_t number_ = 0;
};

std::string where(const std::string& source, std::size_t line, std::size_t column = 0) {
    std::string s = source + ":" + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line, std::size_t col) {
    const auto v = to_real(cell);
    if (!v) throw DataError(where(source, line, col) + ": cannot parse '" + cell + "' as a real");
    if (!std::isfinite(*v)) throw DataError(where(source, line, col) + ": non-finite value '" + cell + "'");
    return *v;
}

}  // namespace

ResponseTransform parse_transform(const std::string& text) {
    if (text == "none") return ResponseTransform::none;
    if (text == "logit10") return ResponseTransform::logit10;
    throw ArgumentError("unknown response transform '" + text + "' (expected none|logit10)");
}

std::string transform_name(ResponseTransform t) {
    return t == ResponseTransform::logit10 ? "logit10" : "none";
}

double logit10(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("logit10: " + format_real(u) + " outside (0,1)");
    return std::log10(u / (1.0 - u));
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Dataset parse_dataset(std::istream& in, ResponseTransform transform, const std::string& source) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw DataError(source + ": empty file, header row required");
    const std::vector<std::string> header = split_csv(line);
    if (header.size() < 2) throw DataError(where(source, 1) + ": header needs grid columns and 'y'");
    if (header.back() != "y") {
        throw DataError(where(source, 1, header.size()) + ": last header column must be 'y', got '" +
                        header.back() + "'");
    }
    const auto grid_size = static_cast<Index>(header.size() - 1);
    Vector grid(grid_size);
    for (Index j = 0; j < grid_size; ++j) {
        const auto col = static_cast<std::size_t>(j + 1);
        const auto v = to_real(header[static_cast<std::size_t>(j)]);
        if (!v || !std::isfinite(*v)) {
            throw DataError(where(source, 1, col) + ": grid column name '" +
                            header[static_cast<std::size_t>(j)] + "' is not a real");
        }
        grid(j) = *v;
        if (j > 0 && !(grid(j) > grid(j - 1))) {
            throw DataError(where(source, 1, col) + ": grid values not strictly increasing");
        }
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw DataError(where(source, reader.number()) + ": ragged row, expected " +
                            std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            values[c] = parse_cell(cells[c], source, reader.number(), c + 1);
        }
        if (transform == ResponseTransform::logit10) {
            const double u = values.back();
            if (!(u > 0.0 && u < 1.0)) {
                throw DataError(where(source, reader.number(), cells.size()) + ": response " +
                                format_real(u) + " outside (0,1) required by logit10");
            }
            values.back() = logit10(u);
        }
        rows.push_back(std::move(values));
        row_lines.push_back(reader.number());
    }
    const auto n = static_cast<Index>(rows.size());
    if (n < 2) throw DataError(source + ": need at least 2 data rows, got " + std::to_string(n));
    Matrix x(n, grid_size);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (Index j = 0; j < grid_size; ++j) x(i, j) = r[static_cast<std::size_t>(j)];
        y(i) = r.back();
    }
    return Dataset(std::move(grid), std::move(x), std::move(y));
}

Dataset load_dataset(const std::filesystem::path& path, ResponseTransform transform) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open file");
    return parse_dataset(in, transform, path.string());
}

void write_dataset(std::ostream& out, const Dataset& d) {
    for (Index j = 0; j < d.grid_size(); ++j) out << format_real(d.grid()(j)) << ',';
    out << "y\n";
    for (Index i = 0; i < d.size(); ++i) {
        for (Index j = 0; j < d.grid_size(); ++j) out << format_real(d.x()(i, j)) << ',';
        out << format_real(d.y()(i)) << '\n';
    }
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(path.string() + ": cannot open for writing");
        try {
            writer(out);
        } catch (...) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw DataError(path.string() + ": write failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
    write_atomically(path, [&](std::ostream& out) { write_dataset(out, d); });
}

void write_table(std::ostream& out, const std::vector<std::string>& header, const Matrix& values) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_real(values(i, j));
        out << '\n';
    }
}

KernelSpec load_tabulated_kernel(const std::filesystem::path& path) {
    std::ifstream in(path);
    const std::string source = path.string();
    if (!in) throw DataError(source + ": cannot open file");
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw DataError(source + ": empty kernel file");
    const std::vector<std::string> header = split_csv(line);
    const auto grid_size = static_cast<Index>(header.size());
    Vector grid(grid_size);
    for (Index j = 0; j < grid_size; ++j) {
        grid(j) = parse_cell(header[static_cast<std::size_t>(j)], source, 1, static_cast<std::size_t>(j + 1));
        if (j > 0 && !(grid(j) > grid(j - 1))) {
            throw DataError(where(source, 1, static_cast<std::size_t>(j + 1)) +
                            ": grid values not strictly increasing");
        }
    }
    Matrix k(grid_size, grid_size);
    Index row = 0;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (static_cast<Index>(cells.size()) != grid_size) {
            throw DataError(where(source, reader.number()) + ": ragged row, expected " +
                            std::to_string(grid_size) + " fields, got " + std::to_string(cells.size()));
        }
        if (row >= grid_size) throw DataError(where(source, reader.number()) + ": too many kernel rows");
        for (Index j = 0; j < grid_size; ++j) {
            k(row, j) = parse_cell(cells[static_cast<std::size_t>(j)], source, reader.number(),
                                   static_cast<std::size_t>(j + 1));
        }
        ++row;
    }
    if (row != grid_size) {
        throw DataError(source + ": expected " + std::to_string(grid_size) + " kernel rows, got " +
                        std::to_string(row));
    }
    return KernelSpec::tabulated(std::move(grid), SymMatrix(std::move(k)));
}

// Fit file: "[section]" markers, each followed by a CSV header line and rows.

void write_fit(std::ostream& out, const FitFile& file) {
    const SirFit& f = file.fit;
    const FitDiagnostics& diag = f.diagnostics;
    out << "[metadata]\nkey,value\n";
    out << "format_version," << kFitFormatVersion << '\n';
    out << "n," << f.xi_hat.rows() << '\n';
    out << "J," << f.grid.size() << '\n';
    out << "S," << f.slices << '\n';
    out << "k," << f.rank << '\n';
    out << "effective_k," << f.effective_rank << '\n';
    out << "p," << f.directions << '\n';
    out << "seed," << file.seed << '\n';
    out << "transform," << transform_name(file.transform) << '\n';
    out << "rel_tol," << format_real(file.policy.rel_tol) << '\n';
    out << "abs_floor," << format_real(file.policy.abs_floor) << '\n';
    out << "eigengap_ratio," << (diag.eigengap_ratio ? format_real(*diag.eigengap_ratio) : "none") << '\n';

    out << "[sir_eigenvalues]\nj,value\n";
    for (Index j = 0; j < f.sir_eigenvalues.size(); ++j) {
        out << j + 1 << ',' << format_real(f.sir_eigenvalues(j)) << '\n';
    }
    out << "[beta]\nt,x_mean";
    for (Index c = 0; c < f.beta.cols(); ++c) out << ",beta_" << c + 1;
    out << '\n';
    for (Index j = 0; j < f.beta.rows(); ++j) {
        out << format_real(f.grid(j)) << ',' << format_real(f.x_mean(j));
        for (Index c = 0; c < f.beta.cols(); ++c) out << ',' << format_real(f.beta(j, c));
        out << '\n';
    }
    out << "[xi_hat]\ni,y";
    for (Index c = 0; c < f.xi_hat.cols(); ++c) out << ",xi_" << c + 1;
    out << '\n';
    for (Index i = 0; i < f.xi_hat.rows(); ++i) {
        out << i + 1 << ',' << format_real(file.training_y(i));
        for (Index c = 0; c < f.xi_hat.cols(); ++c) out << ',' << format_real(f.xi_hat(i, c));
        out << '\n';
    }
    out << "[covariance_eigenvalues]\nj,value,cumulative_variance\n";
    for (Index j = 0; j < diag.covariance_eigenvalues.size(); ++j) {
        out << j + 1 << ',' << format_real(diag.covariance_eigenvalues(j)) << ','
            << format_real(diag.cumulative_variance(j)) << '\n';
    }
    out << "[residual_trace]\nk,value\n";
    for (Index j = 0; j < diag.residual_trace.size(); ++j) {
        out << j + 1 << ',' << format_real(diag.residual_trace(j)) << '\n';
    }
    out << "[warnings]\nmessage\n";
    for (const auto& w : f.warnings) {
        std::string clean = w;
        for (char& ch : clean) {
            if (ch == '\n' || ch == '\r') ch = ' ';
        }
        out << clean << '\n';
    }
}

namespace {

struct Section {
    std::size_t header_line = 0;
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::string>> rows;  // (line number, raw text)
};

std::map<std::string, Section> read_sections(std::istream& in, const std::string& source) {
    LineReader reader(in);
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    bool expect_header = false;
    std::string line;
    while (reader.next(line)) {
        if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
            const std::string name = line.substr(1, line.size() - 2);
            current = &sections[name];
            expect_header = true;
            continue;
        }
        if (!current) {
            if (trim(line).empty()) continue;
            throw DataError(where(source, reader.number()) + ": content before the first section");
        }
        if (expect_header) {
            current->header_line = reader.number();
            current->header = split_csv(line);
            expect_header = false;
            continue;
        }
        if (line.empty()) continue;
        current->rows.emplace_back(reader.number(), line);
    }
    return sections;
}

const Section& require_section(const std::map<std::string, Section>& s, const std::string& name,
                               const std::string& source) {
    const auto it = s.find(name);
    if (it == s.end()) throw DataError(source + ": fit file is missing section [" + name + "]");
    return it->second;
}

Matrix numeric_rows(const Section& sec, std::size_t columns, const std::string& source) {
    Matrix m(static_cast<Index>(sec.rows.size()), static_cast<Index>(columns));
    for (std::size_t r = 0; r < sec.rows.size(); ++r) {
        const auto& [line_no, text] = sec.rows[r];
        const std::vector<std::string> cells = split_csv(text);
        if (cells.size() != columns) {
            throw DataError(where(source, line_no) + ": ragged row, expected " + std::to_string(columns) +
                            " fields, got " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < columns; ++c) {
            const auto v = to_real(cells[c]);
            if (!v) throw DataError(where(source, line_no, c + 1) + ": cannot parse '" + cells[c] + "'");
            m(static_cast<Index>(r), static_cast<Index>(c)) = *v;
        }
    }
    return m;
}

Index to_index(const std::string& text, const std::string& key, const std::string& source) {
    const auto v = to_real(text);
    if (!v || *v != std::floor(*v)) throw DataError(source + ": metadata '" + key + "' is not an integer");
    return static_cast<Index>(*v);
}

}  // namespace

FitFile read_fit(std::istream& in, const std::string& source) {
    const auto sections = read_sections(in, source);
    std::map<std::string, std::string> meta;
    for (const auto& [line_no, text] : require_section(sections, "metadata", source).rows) {
        const auto comma = text.find(',');
        if (comma == std::string::npos) throw DataError(where(source, line_no) + ": expected key,value");
        meta[text.substr(0, comma)] = text.substr(comma + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = meta.find(key);
        if (it == meta.end()) throw DataError(source + ": metadata is missing '" + key + "'");
        return it->second;
    };
    if (to_index(get("format_version"), "format_version", source) != kFitFormatVersion) {
        throw DataError(source + ": unsupported fit format version " + get("format_version"));
    }

    FitFile file;
    SirFit& f = file.fit;
    const Index n = to_index(get("n"), "n", source);
    const Index grid_size = to_index(get("J"), "J", source);
    f.slices = to_index(get("S"), "S", source);
    f.rank = to_index(get("k"), "k", source);
    f.effective_rank = to_index(get("effective_k"), "effective_k", source);
    f.directions = to_index(get("p"), "p", source);
    {
        const std::string& seed = get("seed");
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), v);
        if (ec != std::errc() || ptr != seed.data() + seed.size()) {
            throw DataError(source + ": metadata 'seed' is not an unsigned integer");
        }
        file.seed = v;
    }
    file.transform = parse_transform(get("transform"));
    file.policy.rel_tol = *to_real(get("rel_tol"));
    file.policy.abs_floor = *to_real(get("abs_floor"));
    if (get("eigengap_ratio") != "none") {
        const auto v = to_real(get("eigengap_ratio"));
        if (!v) throw DataError(source + ": metadata 'eigengap_ratio' is not a real");
        f.diagnostics.eigengap_ratio = *v;
    }

    const Index p = f.directions;
    f.sir_eigenvalues = numeric_rows(require_section(sections, "sir_eigenvalues", source), 2, source).col(1);

    const Matrix beta = numeric_rows(require_section(sections, "beta", source),
                                     static_cast<std::size_t>(p + 2), source);
    if (beta.rows() != grid_size) throw DataError(source + ": [beta] row count does not match J");
    f.grid = beta.col(0);
    f.x_mean = beta.col(1);
    f.beta = beta.rightCols(p);

    const Matrix xi = numeric_rows(require_section(sections, "xi_hat", source),
                                   static_cast<std::size_t>(p + 2), source);
    if (xi.rows() != n) throw DataError(source + ": [xi_hat] row count does not match n");
    file.training_y = xi.col(1);
    f.xi_hat = xi.rightCols(p);

    const Matrix cov = numeric_rows(require_section(sections, "covariance_eigenvalues", source), 3, source);
    f.diagnostics.covariance_eigenvalues = cov.col(1);
    f.diagnostics.cumulative_variance = cov.col(2);
    f.diagnostics.residual_trace =
        numeric_rows(require_section(sections, "residual_trace", source), 2, source).col(1);
    for (const auto& row : require_section(sections, "warnings", source).rows) f.warnings.push_back(row.second);
    return file;
}

FitFile load_fit(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open file");
    return read_fit(in, path.string());
}

void write_cv_report(std::ostream& out, const CvReport& report) {
    out << "k,cv,paired_se,note\n";
    for (std::size_t g = 0; g < report.rank_grid.size(); ++g) {
        std::string note = report.notes[g];
        for (char& ch : note) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        out << report.rank_grid[g] << ',' << format_real(report.cv_values[g]) << ','
            << format_real(report.paired_se[g]) << ',' << note << '\n';
    }
}

std::vector<Index> parse_rank_grid(const std::string& text) {
    std::vector<Index> out;
    auto parse_int = [&](std::string_view s) {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
            throw ArgumentError("invalid rank grid '" + text + "' (expected a..b or a comma list of k >= 1)");
        }
        return static_cast<Index>(v);
    };
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const Index a = parse_int(std::string_view(text).substr(0, dots));
        const Index b = parse_int(std::string_view(text).substr(dots + 2));
        if (b < a) throw ArgumentError("invalid rank grid '" + text + "': empty range");
        for (Index k = a; k <= b; ++k) out.push_back(k);
        return out;
    }
    for (const auto& cell : split_csv(text)) out.push_back(parse_int(cell));
    return out;
}

CvScheme parse_scheme(const std::string& text) {
    if (text == "loo") return LeaveOneOut{};
    if (text.rfind("holdout:", 0) == 0) {
        const auto v = to_real(text.substr(8));
        if (!v || !(*v > 0.0 && *v < 1.0)) {
            throw ArgumentError("invalid scheme '" + text + "': holdout fraction must lie in (0,1)");
        }
        return Holdout{*v};
    }
    if (text.rfind("first:", 0) == 0) {
        const std::string num = text.substr(6);
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc() || ptr != num.data() + num.size() || v < 2) {
            throw ArgumentError("invalid scheme '" + text + "': first:N needs N >= 2");
        }
        return LeadingSplit{static_cast<Index>(v)};
    }
    throw ArgumentError("unknown scheme '" + text + "' (expected loo|holdout:FRAC|first:N)");
}

void RunConfig::validate() const {
    if (slices < 2) throw ArgumentError("--slices must be >= 2");
    if (rank && *rank < 1) throw ArgumentError("--rank must be >= 1");
    for (Index k : rank_grid) {
        if (k < 1) throw ArgumentError("--rank-grid entries must be >= 1");
    }
    if (directions && *directions < 1) throw ArgumentError("--dirs must be >= 1");
    if (scheme) parse_scheme(*scheme);
    policy.validate();
}

}  // namespace fsir
