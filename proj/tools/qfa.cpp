#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qfa/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Cascaded quantum feedback amplifier analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qfa::tool_name) + " " + qfa::tool_version);

    qfa::table1_args t1;
    std::string t1_config, t1_out;
    auto* table1 = app.add_subcommand("table1", "Recompute the nominal-parameter sensitivity table");
    table1->add_option("--config", t1_config, "JSON case configuration (default: built-in cases)");
    table1->add_option("--out", t1_out, "CSV output path; a .json summary is written next to it");

    qfa::nyquist_args ny;
    std::string ny_config, ny_out;
    auto* nyq = app.add_subcommand("nyquist", "Type-B open-loop Nyquist curve and gain margin");
    nyq->add_option("--case", ny.case_name, "Case name")->required();
    nyq->add_option("--config", ny_config, "JSON case configuration");
    nyq->add_option("--out", ny_out, "CSV output path; a .json summary is written next to it");

    qfa::gainplot_args gp;
    std::string gp_config, gp_out;
    std::uint64_t gp_seed = 0;
    int gp_samples = 0;
    auto* gain = app.add_subcommand("gainplot", "Monte Carlo gain curves under epsilon uncertainty");
    gain->add_option("--case", gp.case_name, "Case name")->required();
    gain->add_option("--config", gp_config, "JSON case configuration");
    auto* seed_opt = gain->add_option("--seed", gp_seed, "Random seed (default: case seed)");
    auto* samples_opt = gain->add_option("--samples", gp_samples, "Sample count (default: case samples)")
                            ->check(CLI::PositiveNumber);
    gain->add_option("--spread", gp.options.spread, "Relative epsilon spread")->check(CLI::Range(0.0, 0.999));
    gain->add_option("--threads", gp.options.threads, "Worker threads")->check(CLI::PositiveNumber);
    gain->add_option("--out", gp_out, "CSV output path; a .json summary is written next to it");

    qfa::verify_args va;
    std::string scope = "all", va_json;
    bool corrupt = false;
    auto* ver = app.add_subcommand("verify", "Run the invariant suite");
    ver->add_option("--scope", scope, "all|theorem|appendix|ccr|stability")
        ->check(CLI::IsMember({"all", "theorem", "appendix", "ccr", "stability"}));
    ver->add_option("--draws", va.options.draws, "Valid random configurations for the theorem sweep")
        ->check(CLI::PositiveNumber);
    ver->add_option("--seed", va.options.seed, "Seed for the theorem sweep");
    ver->add_option("--json", va_json, "Write the JSON report here instead of stdout");
    ver->add_flag("--corrupt-sign-bridge", corrupt, "Mutation check: invert the controller sign convention")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qfa::exit_config;
    }

    auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };

    if (*table1) {
        t1.config = opt(t1_config);
        t1.out = opt(t1_out);
        return qfa::cmd_table1(t1, std::cout, std::cerr);
    }
    if (*nyq) {
        ny.config = opt(ny_config);
        ny.out = opt(ny_out);
        return qfa::cmd_nyquist(ny, std::cout, std::cerr);
    }
    if (*gain) {
        gp.config = opt(gp_config);
        gp.out = opt(gp_out);
        if (*seed_opt) gp.options.seed = gp_seed;
        if (*samples_opt) gp.options.samples = gp_samples;
        return qfa::cmd_gainplot(gp, std::cout, std::cerr);
    }
    const std::pair<const char*, qfa::verify_scope> scopes[] = {
        {"all", qfa::verify_scope::all},           {"theorem", qfa::verify_scope::theorem},
        {"appendix", qfa::verify_scope::appendix}, {"ccr", qfa::verify_scope::ccr},
        {"stability", qfa::verify_scope::stability}};
    for (const auto& [name, s] : scopes)
        if (scope == name) va.options.scope = s;
    if (corrupt) va.options.bridge = qfa::sign_bridge::inverted;
    va.json_out = opt(va_json);
    return qfa::cmd_verify(va, std::cout, std::cerr);
}
