// Command line front end: solve recurrences, run stability campaigns,
// and emit built-in families as .rec files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "padiclab/campaign.hpp"
#include "padiclab/families.hpp"

namespace fs = std::filesystem;
using namespace padiclab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolveFailure = 2;
constexpr int kExitViolation = 3;

std::vector<Rational> parse_rational_list(const std::string& s) {
    std::vector<Rational> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(rational_from_string(item));
    return out;
}

struct InputOptions {
    std::string file;
    std::string family;
    unsigned n = 4;
    std::string c_list;
    unsigned k = 4;
    std::string a_list;
    long length = 11;
    std::string fz_d = "1";
    std::string x0 = "1", x1 = "1";
    std::string matrix;  // rows separated by ';', entries by ','
};

void add_input_flags(CLI::App* cmd, InputOptions& in, bool family_only) {
    if (!family_only)
        cmd->add_option("input", in.file, "path to a .rec recurrence file");
    cmd->add_option("--family", in.family,
                    "built-in family: counterexample, frieze, somos, fz54, dodgson, "
                    "polynomial-demo");
    cmd->add_option("--n", in.n, "frieze size n / dodgson matrix size");
    cmd->add_option("--c", in.c_list,
                    "comma list: frieze constants c_0..c_{n-1}, or the fz54 constant c");
    cmd->add_option("--k", in.k, "somos order k");
    cmd->add_option("--a", in.a_list, "comma list: somos coefficients a_1..a_{k/2}");
    cmd->add_option("--length", in.length, "last index of a sequence family");
    cmd->add_option("--d", in.fz_d, "fz54 constant d");
    cmd->add_option("--x0", in.x0, "fz54 initial value x_0");
    cmd->add_option("--x1", in.x1, "fz54 initial value x_1");
    cmd->add_option("--matrix", in.matrix,
                    "dodgson input matrix, rows ';'-separated, entries ','-separated");
}

FamilyRequest to_request(const InputOptions& in) {
    FamilyRequest req;
    req.name = in.family;
    req.n = in.n;
    req.k = in.k;
    req.length = in.length;
    if (!in.c_list.empty()) {
        req.c = parse_rational_list(in.c_list);
        if (!req.c.empty()) req.fz_c = req.c.front();
    }
    if (!in.a_list.empty()) req.a = parse_rational_list(in.a_list);
    if (req.name == "somos" && req.a.empty())
        req.a.assign(req.k / 2, Rational(1));
    req.fz_d = rational_from_string(in.fz_d);
    req.x0 = rational_from_string(in.x0);
    req.x1 = rational_from_string(in.x1);
    if (!in.matrix.empty()) {
        std::stringstream ss(in.matrix);
        std::string row;
        while (std::getline(ss, row, ';')) req.matrix.push_back(parse_rational_list(row));
    }
    return req;
}

RecurrenceSpec load_spec(const InputOptions& in, const PrimeContext& ctx) {
    if (!in.family.empty()) return builtin_family(to_request(in), ctx);
    if (in.file.empty()) throw DomainError("no input: give a .rec file or --family");
    std::ifstream f(in.file);
    if (!f) throw DomainError("cannot open " + in.file);
    std::stringstream buf;
    buf << f.rdbuf();
    return elaborate(parse(buf.str()), ctx);
}

int cmd_solve(const InputOptions& in, unsigned long p) {
    RecurrenceSpec spec = load_spec(in, PrimeContext(p));
    std::map<NodeId, Rational> g;
    try {
        g = solve_exact(spec);
    } catch (const DivisionByZeroError& e) {
        std::cerr << "exact solution failed: " << e.what() << "\n";
        return kExitSolveFailure;
    }
    nlohmann::json out = nlohmann::json::object();
    for (const NodeDef& d : spec.nodes()) out[d.id.str()] = g.at(d.id).get_str();
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_campaign(const InputOptions& in, unsigned long p, unsigned N, const std::string& mode,
                 unsigned trials, std::uint64_t seed, unsigned depth, bool pairwise,
                 const std::string& out_dir, unsigned jobs, bool fixture) {
    if (trials == 0) throw DomainError("campaign: --trials must be positive");
    GremlinConfig cfg{PrimeContext(p), N, depth, seed, Mode::Exact};
    if (mode == "float")
        cfg.mode = Mode::Float;
    else if (mode == "fixed")
        cfg.mode = Mode::Fixed;
    else if (mode != "exact")
        throw DomainError("bad --mode (exact|float|fixed)");

    RecurrenceSpec spec = load_spec(in, cfg.ctx);
    std::optional<std::map<NodeId, Rational>> g;
    try {
        g = solve_exact(spec);
    } catch (const DivisionByZeroError& e) {
        std::cerr << "note: no exact solution (" << e.what() << "); running pairwise\n";
        pairwise = true;
    }

    StarAssignment fixture_stars;
    const StarAssignment* fixture_ptr = nullptr;
    if (fixture) {
        if (cfg.mode != Mode::Exact)
            throw DomainError("--fixture requires --mode exact");
        fixture_stars = documented_counterexample_assignment(spec, cfg);
        fixture_ptr = &fixture_stars;
    }

    CampaignReport report = run_campaign(spec, cfg, g ? &*g : nullptr, pairwise, trials,
                                         jobs, fixture_ptr);

    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    {
        std::ofstream trials_f(dir / "trials.jsonl", std::ios::binary);
        if (!trials_f) throw DomainError("cannot write " + (dir / "trials.jsonl").string());
        trials_f << trials_jsonl(report);
    }
    {
        std::ofstream summary_f(dir / "summary.csv", std::ios::binary);
        if (!summary_f) throw DomainError("cannot write " + (dir / "summary.csv").string());
        summary_f << summary_csv(report);
    }
    std::cout << "trials: " << report.trials.size() << "  violations: " << report.violations
              << "  aborted: " << report.aborted_trials << "\n";
    return report.violations > 0 ? kExitViolation : kExitOk;
}

int cmd_family(const InputOptions& in, const std::string& out_file) {
    if (in.family.empty()) throw DomainError("family: --family is required");
    std::string text = family_rec_text(to_request(in));
    if (out_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_file, std::ios::binary);
        if (!f) throw DomainError("cannot write " + out_file);
        f << text;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic laboratory for p-adic stability of recurrences"};
    app.require_subcommand(1);

    unsigned long p = 2;
    unsigned N = 6, trials = 100, depth = 8, jobs = 1;
    std::uint64_t seed = 0;
    std::string mode = "exact", out_dir = "campaign-out", out_file;
    bool pairwise = false, fixture = false;

    InputOptions solve_in, camp_in, fam_in;

    CLI::App* solve = app.add_subcommand("solve", "print the exact solution as JSON");
    add_input_flags(solve, solve_in, false);
    solve->add_option("--p", p, "prime of the p-adic valuation");

    CLI::App* campaign =
        app.add_subcommand("campaign", "run perturbation trials and write reports");
    add_input_flags(campaign, camp_in, false);
    campaign->add_option("--p", p, "prime of the p-adic valuation");
    campaign->add_option("--N", N, "precision (mantissa digits)");
    campaign->add_option("--mode", mode, "exact|float|fixed");
    campaign->add_option("--trials", trials, "number of random trials");
    campaign->add_option("--seed", seed, "campaign seed");
    campaign->add_option("--depth", depth, "digits of each random star's unit part");
    campaign->add_flag("--pairwise", pairwise, "compare pairs of perturbations");
    campaign->add_option("--out", out_dir, "output directory");
    campaign->add_option("--jobs", jobs, "worker threads");
    campaign->add_flag("--fixture", fixture,
                       "replay the documented counterexample perturbation as trial 0");

    CLI::App* family = app.add_subcommand("family", "emit a built-in family as .rec text");
    add_input_flags(family, fam_in, true);
    family->add_option("-o,--output", out_file, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_in, p);
        if (campaign->parsed())
            return cmd_campaign(camp_in, p, N, mode, trials, seed, depth, pairwise, out_dir,
                                jobs, fixture);
        return cmd_family(fam_in, out_file);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivisionByZeroError& e) {
        std::cerr << "exact solution failed: " << e.what() << "\n";
        return kExitSolveFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
