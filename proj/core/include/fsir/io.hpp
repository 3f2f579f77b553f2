#pragma once

// File formats and run configuration.
//
// Dataset CSV: header "t_1,...,t_J,y" whose first J cells are the grid values,
// then one row per observation (J curve values, then the response). Comma
// separator, '.' decimal point, UTF-8. Reals are written with 17 significant
// digits so files round-trip exactly.

#include "fsir/link.hpp"
#include "fsir/rkhs.hpp"
#include "fsir/sir.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsir {

enum class ResponseTransform { none, logit10 };

ResponseTransform parse_transform(const std::string& text);
std::string transform_name(ResponseTransform t);

/// log10(u / (1 - u)); u must lie in (0,1).
double logit10(double u);

/// "%.17g" rendering, which round-trips every double.
std::string format_real(double v);

Dataset parse_dataset(std::istream& in, ResponseTransform transform = ResponseTransform::none,
                      const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path,
                     ResponseTransform transform = ResponseTransform::none);
void write_dataset(std::ostream& out, const Dataset& d);

/// Writes through a temporary file in the same directory and renames it into
/// place, so a failed write leaves no partial output.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

void save_dataset(const std::filesystem::path& path, const Dataset& d);

/// Plain numeric table with a header row.
void write_table(std::ostream& out, const std::vector<std::string>& header, const Matrix& values);

/// Tabulated kernel CSV: one header row with the J grid points, then J rows of kernel values.
KernelSpec load_tabulated_kernel(const std::filesystem::path& path);

/// Serialized fit plus the training responses needed to refit the link smoother.
struct FitFile {
    SirFit fit;
    Vector training_y;
    std::uint64_t seed = 0;
    ResponseTransform transform = ResponseTransform::none;
    RankPolicy policy;
};

inline constexpr int kFitFormatVersion = 1;

void write_fit(std::ostream& out, const FitFile& f);
FitFile read_fit(std::istream& in, const std::string& source = "<stream>");
FitFile load_fit(const std::filesystem::path& path);

/// Columns k, cv, paired_se, note.
void write_cv_report(std::ostream& out, const CvReport& report);

/// "a..b" (inclusive) or a comma list "1,3,5".
std::vector<Index> parse_rank_grid(const std::string& text);
/// "loo", "holdout:FRAC" or "first:N".
CvScheme parse_scheme(const std::string& text);

/// Options shared by the CLI commands; validated before any computation.
struct RunConfig {
    Index slices = 10;
    std::optional<Index> rank;
    std::vector<Index> rank_grid;
    std::optional<Index> directions;
    std::optional<std::string> scheme;  // default chosen from n
    std::uint64_t seed = 0;
    RankPolicy policy;
    ResponseTransform transform = ResponseTransform::none;

    void validate() const;
};

}  // namespace fsir
