#pragma once

#include "m2sdf/denoisers/registry.hpp"
#include "m2sdf/noisegen/noise.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace m2sdf::evalkit {

using imagecore::Image;

inline constexpr const char* kBaselineSubject = "noisy";

enum class RowSource { Computed, Fixture };
std::string source_name(RowSource s);

struct MetricRow {
    std::string subject;
    std::string context;
    std::vector<std::pair<std::string, double>> metrics;  // in column order
    RowSource source = RowSource::Computed;

    std::optional<double> value(const std::string& metric) const;
    /// ArgumentError on an empty metric name or a non-finite value.
    void validate() const;
    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// A subject qualifies when at least min_improved metrics of metric_set are
/// strictly greater than the baseline row's.
struct SelectionRule {
    int min_improved = 1;
    std::vector<std::string> metric_set;
    void validate() const;
};

struct Evaluation {
    MetricRow noisy;
    MetricRow denoised;
};

/// Noise for clean_set[i] uses seed noise.seed + i. Rows carry mean psnr and
/// ssim; the noisy row goes through the identity handle on the same path.
Evaluation evaluate_denoiser(const denoisers::DenoiserHandle& handle, const std::vector<Image>& clean_set,
                             const noisegen::NoiseSpec& noise);
/// Same, with clean_set[i] observed through noise.observe(clean_set[i], i).
Evaluation evaluate_denoiser(const denoisers::DenoiserHandle& handle, const std::vector<Image>& clean_set,
                             const noisegen::NoiseCycle& noise);

/// Mean psnr/ssim of outputs[i] against clean[i].
MetricRow score_outputs(const std::string& subject, const std::string& context, const std::vector<Image>& clean,
                        const std::vector<Image>& outputs);

/// Lexicographically sorted subjects (baseline excluded) meeting the rule.
std::vector<std::string> select_denoisers(const std::vector<MetricRow>& table, const SelectionRule& rule);

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(const std::string& name);

/// Metrics use 6 significant digits, "." as decimal point. Columns are the
/// union of metric names in first-seen order.
std::string format_report(const std::vector<MetricRow>& rows, ReportFormat format);
void emit_report(const std::vector<MetricRow>& rows, const std::filesystem::path& path, ReportFormat format);
std::string format_metric(double v);

nlohmann::ordered_json to_json(const MetricRow& row);
MetricRow metric_row_from_json(const nlohmann::ordered_json& j);
std::vector<MetricRow> read_report_json(const std::filesystem::path& path);

/// {context, metric_names, rows: [{subject, values}]}; rows are tagged fixture.
std::vector<MetricRow> load_fixture(const std::filesystem::path& path);
std::vector<MetricRow> fixture_from_json(const nlohmann::ordered_json& j);

}  // namespace m2sdf::evalkit
