#include "tsbubble/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tsbubble/errors.hpp"

namespace tsbubble {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("column '" + name + "' not found in header", 1);
    return static_cast<std::size_t>(it - header.begin());
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    std::vector<std::string> unknown;
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw InvalidSpecError("unknown keys in " + where + ": " + list);
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string TimeSeries::label(std::size_t i) const { return dates.empty() ? std::to_string(i) : dates.at(i); }

TimeSeries read_csv_series(const std::filesystem::path& path, const std::optional<std::string>& date_col,
                           const std::optional<std::string>& value_col) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv(line);
            break;
        }
    }
    if (header.empty()) throw ParseError("missing header row", line_no);

    const std::size_t vcol = value_col ? column_index(header, *value_col) : header.size() - 1;
    std::optional<std::size_t> dcol;
    if (date_col) dcol = column_index(header, *date_col);

    TimeSeries ts;
    ts.name = value_col ? *value_col : header[vcol];
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError(fmt::format("expected {} fields, found {}", header.size(), fields.size()), line_no);
        }
        const auto v = parse_number(fields[vcol]);
        if (!v || !std::isfinite(*v)) {
            throw ParseError("value '" + fields[vcol] + "' is not a finite number", line_no);
        }
        ts.values.push_back(*v);
        if (dcol) ts.dates.push_back(fields[*dcol]);
    }
    return ts;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

nlohmann::json to_json(const VolatilitySpec& vol) {
    return {{"kind", to_string(vol.kind)}, {"sigma0", vol.sigma0}, {"sigma1", vol.sigma1}, {"tau_sigma", vol.tau_sigma}};
}

nlohmann::json to_json(const DgpSpec& spec) {
    const auto& b = spec.bubble;
    return {{"bubble",
             {{"tau1", b.tau1}, {"tau2", b.tau2}, {"tau3", b.tau3}, {"delta1", b.delta1}, {"delta2", b.delta2},
              {"mu", b.mu}}},
            {"volatility", to_json(spec.vol)},
            {"length", spec.length},
            {"seed", spec.seed}};
}

namespace {

// A number or a fraction string such as "1/6".
double ratio_from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw InvalidSpecError("volatility ratio must be a number or a string like \"1/3\"");
    const std::string text = j.get<std::string>();
    const auto slash = text.find('/');
    const auto num = parse_number(trim(text.substr(0, slash)));
    const auto den = slash == std::string::npos ? std::optional<double>(1.0) : parse_number(trim(text.substr(slash + 1)));
    if (!num || !den || !(*den != 0.0)) throw InvalidSpecError("cannot parse volatility ratio '" + text + "'");
    return *num / *den;
}

}  // namespace

VolatilitySpec volatility_from_json(const nlohmann::json& j) {
    check_keys(j, {"kind", "sigma0", "sigma1", "ratio", "tau_sigma"}, "volatility");
    VolatilitySpec v;
    v.kind = volatility_kind_from_string(get_or<std::string>(j, "kind", "constant"));
    v.sigma0 = get_or(j, "sigma0", 1.0);
    v.sigma1 = j.contains("ratio") ? v.sigma0 * ratio_from_json(j.at("ratio")) : get_or(j, "sigma1", v.sigma0);
    v.tau_sigma = get_or(j, "tau_sigma", 0.5);
    v.validate();
    return v;
}

DgpSpec dgp_spec_from_json(const nlohmann::json& j) {
    check_keys(j, {"bubble", "volatility", "length", "seed"}, "dgp spec");
    DgpSpec spec;
    if (j.contains("bubble")) {
        const auto& b = j.at("bubble");
        check_keys(b, {"tau1", "tau2", "tau3", "delta1", "delta2", "mu"}, "bubble");
        spec.bubble.tau1 = get_or(b, "tau1", spec.bubble.tau1);
        spec.bubble.tau2 = get_or(b, "tau2", spec.bubble.tau2);
        spec.bubble.tau3 = get_or(b, "tau3", spec.bubble.tau2);
        spec.bubble.delta1 = get_or(b, "delta1", 0.0);
        spec.bubble.delta2 = get_or(b, "delta2", 0.0);
        spec.bubble.mu = get_or(b, "mu", 0.0);
    }
    if (j.contains("volatility")) spec.vol = volatility_from_json(j.at("volatility"));
    spec.length = get_or<std::size_t>(j, "length", spec.length);
    spec.seed = get_or<std::uint64_t>(j, "seed", 0);
    spec.validate();
    return spec;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidSpecError("experiment config must be a JSON object");
    check_keys(j,
               {"T", "delta1", "volatility", "tests", "replications", "level", "r0", "master_seed", "bootstrap_B",
                "tau1", "tau2", "kernel", "null_steps", "null_replications", "null_seed", "gsadf_null_steps",
                "gsadf_null_replications", "gsadf_null_seed"},
               "experiment config");
    ExperimentConfig c;
    try {
        if (j.contains("T")) c.T_list = j.at("T").get<std::vector<std::size_t>>();
        if (j.contains("delta1")) c.delta1_grid = j.at("delta1").get<std::vector<double>>();
        if (j.contains("volatility")) {
            c.vol_specs.clear();
            for (const auto& v : j.at("volatility")) {
                if (v.contains("ratios")) {
                    nlohmann::json base = v;
                    base.erase("ratios");
                    for (const auto& r : v.at("ratios")) {
                        base["ratio"] = r;
                        c.vol_specs.push_back(volatility_from_json(base));
                    }
                } else {
                    c.vol_specs.push_back(volatility_from_json(v));
                }
            }
        }
        if (j.contains("tests")) {
            c.tests.clear();
            for (const auto& t : j.at("tests")) c.tests.push_back(test_kind_from_string(t.get<std::string>()));
        }
        c.replications = get_or(j, "replications", c.replications);
        c.level = get_or(j, "level", c.level);
        if (j.contains("r0")) {
            const auto& r0 = j.at("r0");
            if (r0.is_string()) {
                if (r0.get<std::string>() != "formula") throw InvalidSpecError("r0 must be \"formula\" or a number");
            } else {
                c.r0_fixed = r0.get<double>();
            }
        }
        c.master_seed = get_or(j, "master_seed", c.master_seed);
        c.bootstrap_B = get_or(j, "bootstrap_B", c.bootstrap_B);
        c.tau1 = get_or(j, "tau1", c.tau1);
        c.tau2 = get_or(j, "tau2", c.tau2);
        if (j.contains("kernel")) c.kernel = kernel_from_string(j.at("kernel").get<std::string>());
        c.null_sadf.steps = get_or(j, "null_steps", c.null_sadf.steps);
        c.null_sadf.replications = get_or(j, "null_replications", c.null_sadf.replications);
        c.null_sadf.seed = get_or(j, "null_seed", c.null_sadf.seed);
        c.null_gsadf.steps = get_or(j, "gsadf_null_steps", c.null_gsadf.steps);
        c.null_gsadf.replications = get_or(j, "gsadf_null_replications", c.null_gsadf.replications);
        c.null_gsadf.seed = get_or(j, "gsadf_null_seed", c.null_gsadf.seed);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpecError(std::string("malformed experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
    return experiment_config_from_json(j);
}

std::string line_chart_svg(std::span<const double> x, std::span<const double> y, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
    constexpr double width = 640.0, height = 360.0, left = 60.0, right = 20.0, top = 36.0, bottom = 44.0;
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    const double xmin = x.empty() ? 0.0 : *xmin_it, xmax = x.empty() ? 1.0 : *xmax_it;
    double ymin = y.empty() ? 0.0 : *ymin_it, ymax = y.empty() ? 1.0 : *ymax_it;
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    auto px = [&](double v) { return left + (v - xmin) / xspan * (width - left - right); };
    auto py = [&](double v) { return height - bottom - (v - ymin) / (ymax - ymin) * (height - top - bottom); };

    std::string points;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        points += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(x[i]), py(y[i]));
    }
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{3}</text>\n"
        "<line x1=\"{4}\" y1=\"{5}\" x2=\"{6}\" y2=\"{5}\" stroke=\"black\"/>\n"
        "<line x1=\"{4}\" y1=\"{7}\" x2=\"{4}\" y2=\"{5}\" stroke=\"black\"/>\n"
        "<text x=\"{2}\" y=\"{8}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{9}</text>\n"
        "<text x=\"14\" y=\"{10}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 14 {10})\">{11}</text>\n"
        "<text x=\"{12}\" y=\"{5}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{13:.4g}</text>\n"
        "<text x=\"{12}\" y=\"{7}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{14:.4g}</text>\n"
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{15}\"/>\n"
        "</svg>\n",
        width, height, width / 2.0, xml_escape(title), left, height - bottom, width - right, top, height - 8.0,
        xml_escape(x_label), height / 2.0, xml_escape(y_label), left - 4.0, ymin, ymax, points);
    return svg;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace tsbubble
