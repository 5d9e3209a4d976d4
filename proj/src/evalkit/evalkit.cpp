#include "m2sdf/evalkit/evalkit.hpp"

#include "m2sdf/denoisers/classical.hpp"
#include "m2sdf/error.hpp"
#include "m2sdf/imagecore/metrics.hpp"
#include "m2sdf/util/json_file.hpp"
#include "m2sdf/util/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace m2sdf::evalkit {

std::string source_name(RowSource s) { return s == RowSource::Computed ? "computed" : "fixture"; }

namespace {

RowSource parse_source(const std::string& s) {
    if (s == "computed") return RowSource::Computed;
    if (s == "fixture") return RowSource::Fixture;
    throw FormatError("unknown row source '" + s + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::optional<double> MetricRow::value(const std::string& metric) const {
    for (const auto& [name, v] : metrics) {
        if (name == metric) return v;
    }
    return std::nullopt;
}

void MetricRow::validate() const {
    for (const auto& [name, v] : metrics) {
        if (name.empty()) throw ArgumentError("row '" + subject + "' has an empty metric name");
        if (!std::isfinite(v)) throw ArgumentError("row '" + subject + "' has a non-finite " + name);
    }
}

void SelectionRule::validate() const {
    if (metric_set.empty()) throw ArgumentError("selection rule needs at least one metric");
    if (min_improved < 1 || min_improved > static_cast<int>(metric_set.size())) {
        throw ArgumentError("min_improved must lie in [1, " + std::to_string(metric_set.size()) + "]");
    }
}

MetricRow score_outputs(const std::string& subject, const std::string& context, const std::vector<Image>& clean,
                        const std::vector<Image>& outputs) {
    if (clean.empty() || clean.size() != outputs.size()) throw ArgumentError("score_outputs needs matching nonempty sets");
    double p = 0.0, s = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        p += imagecore::psnr(clean[i], outputs[i]);
        s += imagecore::ssim(clean[i], outputs[i]);
    }
    const double n = static_cast<double>(clean.size());
    return MetricRow{subject, context, {{"psnr", p / n}, {"ssim", s / n}}, RowSource::Computed};
}

Evaluation evaluate_denoiser(const denoisers::DenoiserHandle& handle, const std::vector<Image>& clean_set,
                             const noisegen::NoiseSpec& noise) {
    return evaluate_denoiser(handle, clean_set, noisegen::NoiseCycle{{noise}});
}

Evaluation evaluate_denoiser(const denoisers::DenoiserHandle& handle, const std::vector<Image>& clean_set,
                             const noisegen::NoiseCycle& noise) {
    if (clean_set.empty()) throw ArgumentError("evaluation set is empty");
    for (const auto& s : noise.specs) s.validate();
    const std::string context = noise.label();
    const auto identity = denoisers::identity_handle();
    std::vector<Image> noisy_out(clean_set.size()), den_out(clean_set.size());
    util::parallel_for(clean_set.size(), [&](std::size_t i) {
        const Image y = noise.observe(clean_set[i], i);
        noisy_out[i] = identity.apply(y);
        try {
            den_out[i] = handle.apply(y);
        } catch (const std::exception& e) {
            throw DataError("denoiser '" + handle.name + "' failed on image " + std::to_string(i) + ": " + e.what());
        }
    });
    return {score_outputs(kBaselineSubject, context, clean_set, noisy_out),
            score_outputs(handle.name, context, clean_set, den_out)};
}

std::vector<std::string> select_denoisers(const std::vector<MetricRow>& table, const SelectionRule& rule) {
    rule.validate();
    const MetricRow* base = nullptr;
    for (const auto& r : table) {
        if (r.subject != kBaselineSubject) continue;
        if (base) throw ArgumentError("table has more than one baseline row");
        base = &r;
    }
    if (!base) throw ArgumentError("table has no '" + std::string(kBaselineSubject) + "' baseline row");
    auto need = [](const MetricRow& r, const std::string& m) {
        const auto v = r.value(m);
        if (!v) throw DataError("row '" + r.subject + "' lacks metric '" + m + "'");
        return *v;
    };
    std::vector<std::string> out;
    for (const auto& r : table) {
        if (&r == base) continue;
        int improved = 0;
        for (const auto& m : rule.metric_set) improved += need(r, m) > need(*base, m);
        if (improved >= rule.min_improved) out.push_back(r.subject);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw ArgumentError("unknown report format '" + name + "' (expected csv or json)");
}

std::string format_metric(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

nlohmann::ordered_json to_json(const MetricRow& row) {
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [name, v] : row.metrics) metrics[name] = std::stod(format_metric(v));
    return {{"subject", row.subject}, {"context", row.context}, {"metrics", metrics}, {"source", source_name(row.source)}};
}

MetricRow metric_row_from_json(const nlohmann::ordered_json& j) {
    try {
        MetricRow r;
        r.subject = j.at("subject").get<std::string>();
        r.context = j.at("context").get<std::string>();
        for (const auto& [name, v] : j.at("metrics").items()) r.metrics.emplace_back(name, v.get<double>());
        r.source = parse_source(j.at("source").get<std::string>());
        r.validate();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad metric row: ") + e.what());
    }
}

std::string format_report(const std::vector<MetricRow>& rows, ReportFormat format) {
    if (rows.empty()) throw ArgumentError("report needs at least one row");
    for (const auto& r : rows) r.validate();
    if (format == ReportFormat::Json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) arr.push_back(to_json(r));
        return arr.dump(2) + "\n";
    }
    std::vector<std::string> columns;
    for (const auto& r : rows) {
        for (const auto& [name, _] : r.metrics) {
            if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
        }
    }
    std::string out = "subject,context";
    for (const auto& c : columns) out += "," + csv_field(c);
    out += ",source\n";
    for (const auto& r : rows) {
        out += csv_field(r.subject) + "," + csv_field(r.context);
        for (const auto& c : columns) {
            out += ",";
            if (const auto v = r.value(c)) out += format_metric(*v);
        }
        out += "," + source_name(r.source) + "\n";
    }
    return out;
}

void emit_report(const std::vector<MetricRow>& rows, const std::filesystem::path& path, ReportFormat format) {
    util::write_text_atomic(path, format_report(rows, format));
}

std::vector<MetricRow> read_report_json(const std::filesystem::path& path) {
    const auto j = util::read_json(path);
    if (!j.is_array()) throw FormatError("report '" + path.string() + "' is not a JSON array");
    std::vector<MetricRow> rows;
    for (const auto& r : j) rows.push_back(metric_row_from_json(r));
    return rows;
}

std::vector<MetricRow> fixture_from_json(const nlohmann::ordered_json& j) {
    try {
        const auto context = j.at("context").get<std::string>();
        const auto names = j.at("metric_names").get<std::vector<std::string>>();
        if (names.empty()) throw FormatError("fixture has no metric names");
        std::vector<MetricRow> rows;
        std::set<std::string> seen;
        for (const auto& jr : j.at("rows")) {
            MetricRow r;
            r.subject = jr.at("subject").get<std::string>();
            if (!seen.insert(r.subject).second) throw FormatError("fixture repeats subject '" + r.subject + "'");
            r.context = context;
            r.source = RowSource::Fixture;
            const auto values = jr.at("values").get<std::vector<double>>();
            if (values.size() != names.size()) {
                throw FormatError("fixture row '" + r.subject + "' has " + std::to_string(values.size()) +
                                  " values for " + std::to_string(names.size()) + " metrics");
            }
            for (std::size_t i = 0; i < names.size(); ++i) r.metrics.emplace_back(names[i], values[i]);
            r.validate();
            rows.push_back(std::move(r));
        }
        return rows;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad fixture: ") + e.what());
    }
}

std::vector<MetricRow> load_fixture(const std::filesystem::path& path) { return fixture_from_json(util::read_json(path)); }

}  // namespace m2sdf::evalkit
