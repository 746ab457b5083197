#pragma once

// Command-line front end. Each subcommand parses its flags, calls exactly one
// library entry point and serializes the result.

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailgap/conflation.hpp"
#include "tailgap/distributions.hpp"
#include "tailgap/errors.hpp"
#include "tailgap/io.hpp"
#include "tailgap/payoffs.hpp"
#include "tailgap/scoring.hpp"
#include "tailgap/simulate.hpp"

namespace tailgap::cli {

enum ExitCode : int { ok = 0, usage = 2, numeric = 3 };

enum class Format { csv, json };

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end != item.c_str() + item.size()) {
            throw ValidationError(flag + ": '" + item + "' is not a number");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(flag + ": empty list");
    return out;
}

/// "alpha=1.1,x_min=1" -> {"alpha": 1.1, "x_min": 1}
inline io::json parse_params(const std::string& text) {
    io::json params = io::json::object();
    if (text.empty()) return params;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("--params: expected name=value, got '" + item + "'");
        const auto name = item.substr(0, eq);
        const auto value = parse_list(item.substr(eq + 1), "--params " + name);
        params[name] = value.front();
    }
    return params;
}

inline bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct DistributionFlags {
    std::string name;
    std::string params;
    std::string file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dist", name, "distribution family (gaussian, pareto, lognormal, exponential, student_t)");
        cmd->add_option("--params", params, "family parameters, e.g. alpha=1.1,x_min=1");
        cmd->add_option("--dist-file", file, "JSON distribution spec");
    }

    bool given() const { return !name.empty() || !file.empty(); }

    DistributionSpec resolve() const {
        if (!file.empty()) {
            if (!name.empty()) throw ValidationError("--dist and --dist-file are mutually exclusive");
            return io::distribution_from_json(io::read_json_file(file));
        }
        if (name.empty()) throw ValidationError("a distribution is required (--dist or --dist-file)");
        return io::make_distribution(io::parse_family(name), parse_params(params));
    }
};

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw ValidationError("--output: cannot write '" + path + "'");
    f << text;
}

inline std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Runs one invocation; `args` excludes the program name. Returns the exit status.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"tailgap: binary forecasts versus continuous payoffs"};
    app.require_subcommand(1, 1);

    std::string output_path;
    std::optional<Format> format;
    const std::map<std::string, Format> formats{{"csv", Format::csv}, {"json", Format::json}};
    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--output", output_path, "write to this file instead of standard output");
        cmd->add_option("--format", format, "csv or json")->transform(CLI::CheckedTransformer(formats))->option_text("csv|json");
    };

    std::function<void()> action;

    // conflate
    auto* conflate = app.add_subcommand("conflate", "conflation rows for a distribution");
    detail::DistributionFlags conflate_dist;
    std::string conflate_ps;
    conflate_dist.attach(conflate);
    conflate->add_option("--ps", conflate_ps, "comma-separated exceedance probabilities");
    common(conflate);
    conflate->callback([&] {
        action = [&] {
            const auto dist = conflate_dist.resolve();
            const auto ps = conflate_ps.empty() ? table_probabilities() : detail::parse_list(conflate_ps, "--ps");
            const auto rows = pseudo_table(dist, ps);
            if (format.value_or(Format::csv) == Format::csv) {
                std::ostringstream os;
                io::write_csv(os, rows);
                detail::emit(os.str(), output_path, out);
            } else {
                detail::emit(detail::dump(io::to_json(rows)), output_path, out);
            }
        };
    });

    // table
    auto* table = app.add_subcommand("table", "reproduce the Gaussian or Pareto conflation table");
    std::string preset;
    double alpha = 1.1;
    table->add_option("--preset", preset, "gaussian or pareto")->required()->check(CLI::IsMember({"gaussian", "pareto"}));
    table->add_option("--alpha", alpha, "Pareto tail exponent for the pareto preset");
    common(table);
    table->callback([&] {
        action = [&] {
            const DistributionSpec dist = preset == "gaussian" ? DistributionSpec(Gaussian{0.0, 1.0})
                                                               : DistributionSpec(Pareto{alpha, 1.0});
            const auto rows = pseudo_table(dist, table_probabilities());
            if (format.value_or(Format::csv) == Format::csv) {
                std::ostringstream os;
                io::write_csv(os, rows);
                detail::emit(os.str(), output_path, out);
            } else {
                detail::emit(detail::dump(io::to_json(rows)), output_path, out);
            }
        };
    });

    // classify
    auto* classify = app.add_subcommand("classify", "tail class from the conditional-excess ladder");
    detail::DistributionFlags classify_dist;
    classify_dist.attach(classify);
    common(classify);
    classify->callback([&] {
        action = [&] {
            const auto c = classify_tail(classify_dist.resolve());
            if (format.value_or(Format::json) == Format::json) {
                detail::emit(detail::dump(io::to_json(c)), output_path, out);
                return;
            }
            std::ostringstream os;
            os << "p,K,lambda,excess\n";
            for (const auto& pt : c.ladder) {
                os << io::format_sig6(pt.p) << ',' << io::format_sig6(pt.K) << ',' << io::format_sig6(pt.lambda) << ','
                   << io::format_sig6(pt.excess) << '\n';
            }
            detail::emit(os.str(), output_path, out);
        };
    });

    // score
    auto* score = app.add_subcommand("score", "score a forecast or payoff file");
    std::string metric, input, variant = "smape";
    double barrier = -infinity, initial = 0.0;
    std::optional<double> forecast_min, forecast_max, naive_error;
    score->add_option("--metric", metric, "brier, tally, pl, smape, mase or m5")
        ->required()
        ->check(CLI::IsMember({"brier", "tally", "pl", "smape", "mase", "m5"}));
    score->add_option("--input", input, "CSV or JSON records")->required();
    score->add_option("--b", barrier, "absorbing barrier for pl");
    score->add_option("--initial", initial, "initial P/L for pl");
    score->add_option("--forecast-min", forecast_min, "forecast of the path minimum (m5)");
    score->add_option("--forecast-max", forecast_max, "forecast of the path maximum (m5)");
    score->add_option("--variant", variant, "smape or mase (m5)")->check(CLI::IsMember({"smape", "mase"}));
    score->add_option("--naive-error", naive_error, "in-sample naive error for mase");
    common(score);
    score->callback([&] {
        action = [&] {
            std::ifstream in(input);
            if (!in) throw ValidationError("--input: cannot open '" + input + "'");
            const bool is_json = detail::ends_with(input, ".json");
            std::optional<io::CsvTable> csv;
            io::json records;
            if (is_json) {
                try {
                    records = io::json::parse(in);
                } catch (const io::json::parse_error& e) {
                    throw ValidationError("--input: malformed JSON: " + std::string(e.what()));
                }
            } else {
                csv = io::read_csv(in);
            }
            // One numeric column, from either CSV or a JSON array of numbers/objects.
            auto column = [&](std::initializer_list<const char*> names) -> std::vector<double> {
                if (csv) {
                    for (const char* n : names) {
                        if (csv->has(n)) return csv->column(n);
                    }
                    throw ValidationError("--input: missing column '" + std::string(*names.begin()) + "'");
                }
                if (!records.is_array()) throw ValidationError("--input: expected a JSON array");
                std::vector<double> v;
                for (std::size_t i = 0; i < records.size(); ++i) {
                    const auto& r = records[i];
                    if (r.is_number()) {
                        v.push_back(r.get<double>());
                        continue;
                    }
                    const char* found = nullptr;
                    for (const char* n : names) {
                        if (r.is_object() && r.contains(n)) {
                            found = n;
                            break;
                        }
                    }
                    if (!found) {
                        throw ValidationError("--input: record " + std::to_string(i + 1) + " missing field '" +
                                              std::string(*names.begin()) + "'");
                    }
                    v.push_back(io::detail::number_field(r, found, "record " + std::to_string(i + 1)));
                }
                return v;
            };
            auto series = [&] { return csv ? io::series_from_csv(*csv) : io::series_from_json(records); };

            ScoreReport report;
            if (metric == "brier") {
                report = brier(series());
            } else if (metric == "tally") {
                const auto hits = column({"hit"});
                std::vector<int> ints;
                for (std::size_t i = 0; i < hits.size(); ++i) ints.push_back(io::as_indicator(hits[i], i + 1, "hit"));
                report = tally(ints);
            } else if (metric == "pl") {
                const auto g = column({"payoff", "value"});
                report = pl_score(g, SurvivalConfig{barrier, initial});
            } else if (metric == "smape" || metric == "mase") {
                const auto s = series();
                std::vector<double> naive;
                if (metric == "mase") {
                    if (naive_error) naive = {*naive_error};
                    else if (csv && csv->has("naive_error")) naive = csv->column("naive_error");
                    else if (!csv) naive = column({"naive_error"});
                    else throw ValidationError("mase needs --naive-error or a naive_error column");
                }
                report = m4_score(s, metric == "smape" ? M4Variant::sMAPE : M4Variant::MASE, naive);
            } else {
                if (!forecast_min || !forecast_max) throw ValidationError("m5 needs --forecast-min and --forecast-max");
                const auto path = column({"value", "realized"});
                std::vector<double> naive;
                if (variant == "mase") {
                    if (!naive_error) throw ValidationError("m5 with --variant mase needs --naive-error");
                    naive = {*naive_error};
                }
                report = m5_extrema_score(*forecast_min, *forecast_max, path,
                                          variant == "smape" ? M4Variant::sMAPE : M4Variant::MASE, naive);
            }
            if (format.value_or(Format::json) == Format::json) {
                detail::emit(detail::dump(io::to_json(report)), output_path, out);
            } else {
                std::ostringstream os;
                os << "metric,value,n,absorbed,absorbed_at\n"
                   << metric_name(report.metric) << ',' << io::json(report.value).dump() << ',' << report.n << ','
                   << (report.absorbed ? 1 : 0) << ',' << (report.absorbed_at ? std::to_string(*report.absorbed_at) : "")
                   << '\n';
                detail::emit(os.str(), output_path, out);
            }
        };
    });

    // payoff
    auto* payoff = app.add_subcommand("payoff", "evaluate a payoff function and its expectation");
    std::string spec_file, structure, strikes, xs;
    std::optional<double> strike, delta1, delta2;
    std::string sharpness_text = "inf";
    detail::DistributionFlags payoff_dist;
    payoff->add_option("--spec", spec_file, "JSON payoff: term list or structure object");
    payoff->add_option("--structure", structure, "call, put, christmas_tree, butterfly, variance_swap_short_vol")
        ->check(CLI::IsMember({"call", "put", "christmas_tree", "butterfly", "variance_swap_short_vol"}));
    payoff->add_option("--strike", strike, "strike K");
    payoff->add_option("--delta1", delta1, "christmas tree first offset");
    payoff->add_option("--delta2", delta2, "christmas tree second offset");
    payoff->add_option("--strikes", strikes, "butterfly strikes K1,K2,K3");
    payoff->add_option("--sharpness", sharpness_text, "softplus sharpness, or inf for exact hinges");
    payoff->add_option("--x", xs, "comma-separated evaluation points");
    payoff_dist.attach(payoff);
    common(payoff);
    payoff->callback([&] {
        action = [&] {
            PayoffFunction g;
            if (!spec_file.empty() == !structure.empty()) throw ValidationError("give exactly one of --spec or --structure");
            if (!spec_file.empty()) {
                g = io::payoff_from_json(io::read_json_file(spec_file));
            } else {
                const double sharpness =
                    sharpness_text == "inf" ? infinity : detail::parse_list(sharpness_text, "--sharpness").front();
                auto need = [](const std::optional<double>& v, const char* flag) {
                    if (!v) throw ValidationError(std::string(flag) + " is required for this structure");
                    return *v;
                };
                Structure s = VarianceSwapShortVol{};
                if (structure == "call") s = Call{need(strike, "--strike")};
                else if (structure == "put") s = Put{need(strike, "--strike")};
                else if (structure == "christmas_tree")
                    s = ChristmasTree{need(strike, "--strike"), need(delta1, "--delta1"), need(delta2, "--delta2")};
                else if (structure == "butterfly") {
                    const auto k = detail::parse_list(strikes, "--strikes");
                    if (k.size() != 3) throw ValidationError("--strikes: expected three values");
                    s = Butterfly{k[0], k[1], k[2]};
                }
                g = build_structure(s, sharpness);
            }
            std::vector<double> points;
            if (!xs.empty()) points = detail::parse_list(xs, "--x");
            std::optional<double> expect;
            if (payoff_dist.given()) expect = expectation(g, payoff_dist.resolve());
            if (format.value_or(Format::json) == Format::json) {
                io::json values = io::json::array();
                for (double x : points) values.push_back({{"x", x}, {"g", g(x)}});
                io::json j{{"payoff", io::to_json(g)}, {"values", values}};
                if (expect) j["expectation"] = *expect;
                detail::emit(detail::dump(j), output_path, out);
            } else {
                std::ostringstream os;
                os << "x,g\n";
                for (double x : points) os << io::json(x).dump() << ',' << io::json(g(x)).dump() << '\n';
                detail::emit(os.str(), output_path, out);
            }
        };
    });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run payoff streams along simulated or replayed paths");
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    simulate->add_option("--config", config_file, "JSON simulation config")->required();
    simulate->add_option("--seed", seed, "overrides the config seed");
    simulate->add_option("--threads", threads, "worker threads (results do not depend on it)");
    common(simulate);
    simulate->callback([&] {
        action = [&] {
            auto cfg = io::simulation_config_from_json(io::read_json_file(config_file));
            if (seed) cfg.seed = *seed;
            if (threads) cfg.threads = *threads;
            const bool csv = format.value_or(Format::json) == Format::csv;
            if (csv) cfg.record_paths = true;
            const auto result = run(cfg);
            for (const auto& w : result.warnings) err << "warning: " << w << '\n';
            if (csv) {
                std::ostringstream os;
                io::write_traces_csv(os, result);
                detail::emit(os.str(), output_path, out);
            } else {
                detail::emit(detail::dump(io::to_json(result)), output_path, out);
            }
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (action) action();
        return ok;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return numeric;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const io::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << '\n';
        return numeric;
    }
}

}  // namespace tailgap::cli
