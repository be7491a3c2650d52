// hypcert command line tool.
//
//   hypcert classify FILE      singular-point check and spectral classification
//   hypcert certify FILE       full pipeline
//   hypcert minimize FILE      minimize Q(., theta) for the file's normal form
//   hypcert check-frame FILE   symplectic frame relations
//
// Exit codes: 0 CERTIFIED, 1 FAILED or NOT_APPLICABLE, 2 MARGINAL, 3 usage or input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypcert/hypcert.hpp"

namespace {

constexpr int kUsage = 3;

struct Flags {
    std::string file;
    int grid = 0;
    double tol = -1;
    std::string slack;
    std::string region;
    std::string format = "json";
    std::string out;
    std::string theta;
};

void add_common(CLI::App* cmd, Flags& f, bool pipeline)
{
    cmd->add_option("file", f.file, "input JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--out", f.out, "write the report to PATH instead of stdout");
    if (!pipeline) return;
    cmd->add_option("--grid", f.grid, "points per axis for every grid axis")->check(CLI::Range(3, 100000));
    cmd->add_option("--tol", f.tol, "spectral tolerance (0 selects the default)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--slack", f.slack, "exact slack, e.g. 1/100");
    cmd->add_option("--region", f.region, "t_max,x_half,xi_half or a single half-width for all three");
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void apply_overrides(hypcert::SymbolFile& file, const Flags& f)
{
    if (f.grid > 0) file.region.t_count = file.region.x_count = file.region.xi_count = f.grid;
    if (f.tol >= 0) file.options.tol = f.tol;
    if (!f.slack.empty()) {
        file.options.slack = hypcert::parse_rational(f.slack);
        if (file.options.slack <= 0) throw hypcert::SchemaError("--slack", "must be positive");
    }
    if (!f.region.empty()) {
        auto v = parse_list(f.region);
        if (v.size() == 1) v.assign(3, v[0]);
        if (v.size() != 3) throw hypcert::SchemaError("--region", "expected one or three numbers");
        file.region.t_max = v[0];
        file.region.x_half = v[1];
        file.region.xi_half = v[2];
    }
    try {
        file.region.validate();
    } catch (const hypcert::InvariantViolation& e) {
        throw hypcert::SchemaError("--region", e.what());
    }
}

bool write_output(const Flags& f, const std::string& text)
{
    if (f.out.empty()) {
        std::cout << text << std::flush;
        return true;
    }
    std::ofstream o(f.out, std::ios::binary);
    o << text;
    if (!o) {
        std::cerr << "hypcert: cannot write '" << f.out << "'\n";
        return false;
    }
    return true;
}

std::string json_or_text(const nlohmann::json& j, const std::string& format)
{
    if (format == "json") return j.dump(2) + "\n";
    std::string s;
    for (const auto& [k, v] : j.items()) s += k + ": " + v.dump() + "\n";
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Certify time functions at effectively hyperbolic double characteristics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("hypcert ") + hypcert::kToolVersion);

    Flags f;
    auto* classify = app.add_subcommand("classify", "singular-point check and spectral classification");
    auto* certify = app.add_subcommand("certify", "full certification pipeline");
    auto* minimize = app.add_subcommand("minimize", "minimize Q(w, theta) over w");
    auto* frame = app.add_subcommand("check-frame", "check canonical relations of a candidate frame");
    add_common(classify, f, true);
    add_common(certify, f, true);
    add_common(minimize, f, true);
    minimize->add_option("--theta", f.theta, "comma separated theta (default 0)");
    add_common(frame, f, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        const std::string text = hypcert::read_file(f.file);
        if (frame->parsed()) {
            auto j = hypcert::frame_report(hypcert::parse_frame_text(text));
            if (!write_output(f, json_or_text(j, f.format))) return kUsage;
            return j["ok"].get<bool>() ? 0 : 1;
        }

        hypcert::SymbolFile file = hypcert::parse_symbol_text(text);
        // Overrides land in "settings"; the hash identifies the file as given.
        const std::string hash = hypcert::input_hash(file);
        apply_overrides(file, f);

        if (minimize->parsed()) {
            nlohmann::json j;
            try {
                j = hypcert::minimize_report(file, f.theta.empty() ? std::vector<double>{} : parse_list(f.theta));
                j["input_hash"] = hash;
            } catch (const hypcert::SchemaError&) {
                throw;
            } catch (const hypcert::DimensionError&) {
                throw;
            } catch (const hypcert::Error& e) {
                std::cerr << "hypcert: " << e.what() << "\n";
                return 1;
            }
            return write_output(f, json_or_text(j, f.format)) ? 0 : kUsage;
        }

        hypcert::Report r = hypcert::run_pipeline(file, classify->parsed());
        r.input_hash = hash;
        auto fmt = f.format == "text" ? hypcert::ReportFormat::Text : hypcert::ReportFormat::Json;
        if (!write_output(f, hypcert::emit_report(r, fmt))) return kUsage;
        return hypcert::exit_code(r.status);
    } catch (const std::invalid_argument& e) {
        std::cerr << "hypcert: " << e.what() << "\n";
        return kUsage;
    } catch (const hypcert::Error& e) {
        std::cerr << "hypcert: " << e.what() << "\n";
        return kUsage;
    }
}
