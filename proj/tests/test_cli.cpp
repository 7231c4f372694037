#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include <stabilab/cli.hpp>

using namespace stabilab;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "stabilab_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const fs::path p = work_dir() / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(STABILAB_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kHeatConfig =
    "grid.d = 1\n"
    "grid.n = 64\n"
    "grid.ell = 32\n"
    "symbol.dimension = 1\n"
    "symbol.degree = 2\n"
    "symbol.coeff = 2 : 1\n"
    "symbol.s = 1\n";

}  // namespace

TEST_CASE("key=value and JSON configs load identically", "[cli]") {
    const auto kv = RunConfig::from_string(
        "# leading comment\n"
        "grid.n = 128\n"
        "\n"
        "symbol.coeff = 2 : 1\n"
        "symbol.coeff = 0 : 3\n"
        "flag = true\n",
        "inline.cfg");
    const auto js = RunConfig::from_string(
        R"({"grid": {"n": 128}, "symbol": {"coeff": ["2 : 1", "0 : 3"]}, "flag": true})",
        "inline.json");
    for (const auto* cfg : {&kv, &js}) {
        REQUIRE(cfg->get_int("grid.n") == 128);
        REQUIRE(cfg->get_all("symbol.coeff") ==
                std::vector<std::string>{"2 : 1", "0 : 3"});
        REQUIRE(cfg->get("flag") == "true");
        REQUIRE_FALSE(cfg->has("absent"));
        REQUIRE_THROWS_AS(cfg->get("absent"), PreconditionError);
    }
}

TEST_CASE("config parsing reports the offending line", "[cli]") {
    try {
        RunConfig::from_string("a = 1\nnot a pair\n", "test.cfg");
        FAIL("expected a parse error");
    } catch (const PreconditionError& e) {
        REQUIRE(std::string(e.what()).find("test.cfg:2") != std::string::npos);
    }
    REQUIRE_THROWS_AS(RunConfig::from_string("= 1\n", "t"), PreconditionError);
    REQUIRE_THROWS_AS(RunConfig::from_string("{bad json", "t"), PreconditionError);
}

TEST_CASE("scalar accessors parse numbers and overrides", "[cli]") {
    RunConfig cfg = RunConfig::from_string("a = 2.5\na = 4\nb = inf\nc = -infinity\nn = 1e2\n", "t");
    REQUIRE(cfg.get_double("a") == 4.0);  // last occurrence wins
    REQUIRE(cfg.get_all("a").size() == 2);
    REQUIRE(std::isinf(cfg.get_double("b")));
    REQUIRE(cfg.get_double("c") < 0.0);
    REQUIRE(std::isinf(cfg.get_double("c")));
    REQUIRE(cfg.get_int("n") == 100);
    REQUIRE(cfg.get_int_or("missing", 7) == 7);
    REQUIRE(cfg.get_double_or("missing", 1.5) == 1.5);
    REQUIRE(cfg.get_or("missing", "dflt") == "dflt");
    cfg.set("a", "9");
    REQUIRE(cfg.get_int("a") == 9);
    REQUIRE_THROWS_AS(RunConfig::from_string("x = 3.5\n", "t").get_int("x"), PreconditionError);
    REQUIRE_THROWS_AS(RunConfig::from_string("x = soup\n", "t").get_double("x"), PreconditionError);
}

TEST_CASE("coefficient entries parse indices and complex values", "[cli]") {
    MultiIndex idx;
    cd value;
    parse_coeff_entry("1 2 : 0.5 -1", 2, idx, value, "w");
    REQUIRE(idx == MultiIndex{1, 2});
    REQUIRE(value == cd(0.5, -1.0));
    parse_coeff_entry("3 : 2", 1, idx, value, "w");
    REQUIRE(idx == MultiIndex{3});
    REQUIRE(value == cd(2.0, 0.0));
    REQUIRE_THROWS_AS(parse_coeff_entry("1 2 0.5", 2, idx, value, "w"), PreconditionError);
    REQUIRE_THROWS_AS(parse_coeff_entry("1 : 0.5", 2, idx, value, "w"), PreconditionError);
    REQUIRE_THROWS_AS(parse_coeff_entry("1 2 : ", 2, idx, value, "w"), PreconditionError);
}

TEST_CASE("factories assemble grid, symbol, and set from config", "[cli]") {
    const auto dflt = grid_from_config(RunConfig{});
    REQUIRE(dflt.d == 1);
    REQUIRE(dflt.n == 256);
    REQUIRE(dflt.ell == 32.0);
    REQUIRE(dflt.p == 2.0);

    const auto cfg = RunConfig::from_string(
        "grid.d = 1\ngrid.n = 64\ngrid.ell = 32\n"
        "symbol.dimension = 2\nsymbol.degree = 2\n"
        "symbol.coeff = 2 0 : 1\nsymbol.coeff = 0 2 : 1\nsymbol.s = 0.5\n",
        "t");
    const auto poly = symbol_from_config(cfg, "symbol");
    REQUIRE(poly.evaluate({1.0, 2.0}) == cd(5.0, 0.0));

    const auto grid = grid_from_config(cfg);
    const auto cfg1 = RunConfig::from_string(
        "symbol.dimension = 1\nsymbol.degree = 2\nsymbol.coeff = 2 : 1\nsymbol.s = 0.5\n", "t");
    const auto frac = fractional_from_config(cfg1, "symbol", grid);
    REQUIRE(frac.cert.validated);
    REQUIRE(frac.power() == Catch::Approx(1.0));
    REQUIRE(frac.nu == Catch::Approx(0.0).margin(1e-12));

    const auto full = set_from_config(RunConfig{}, grid);
    REQUIRE(full.rho == 1.0);
    const auto alt = set_from_config(RunConfig::from_string("set.kind = alternating\n", "t"), grid);
    REQUIRE(alt.rho == Catch::Approx(0.5));
    const auto ra = set_from_config(
        RunConfig::from_string("set.kind = random\nset.rho = 0.4\nset.seed = 9\n", "t"), grid);
    const auto rb = set_from_config(
        RunConfig::from_string("set.kind = random\nset.rho = 0.4\nset.seed = 9\n", "t"), grid);
    REQUIRE(ra.mask == rb.mask);
    REQUIRE_THROWS_AS(set_from_config(RunConfig::from_string("set.kind = swiss\n", "t"), grid),
                      PreconditionError);
}

TEST_CASE("initial states come out normalized in the grid norm", "[cli]") {
    const auto grid = make_grid(1, 64, 32.0);
    const auto cfg = RunConfig::from_string("x0.kind = gaussian\n", "t");
    const auto x = cli::initial_state_from_config(cfg, grid, 1);
    REQUIRE(lp_norm(x, grid.p) == Catch::Approx(1.0));

    const auto r1 = cli::initial_state_from_config(
        RunConfig::from_string("x0.kind = random\n", "t"), grid, 5);
    const auto r2 = cli::initial_state_from_config(
        RunConfig::from_string("x0.kind = random\n", "t"), grid, 5);
    for (long j = 0; j < grid.total(); ++j) REQUIRE(r1.v[j] == r2.v[j]);

    const auto saved = (work_dir() / "x0_roundtrip.bin").string();
    save_state(x, saved);
    const auto fromfile = cli::initial_state_from_config(
        RunConfig::from_string("x0.kind = file\nx0.path = " + saved + "\n", "t"), grid, 1);
    // loading re-normalizes, which may shift the last bits of an already unit state
    for (long j = 0; j < grid.total(); ++j)
        REQUIRE(std::abs(fromfile.v[j] - x.v[j]) <= 1e-14);

    const auto other = make_grid(1, 32, 32.0);
    REQUIRE_THROWS_AS(cli::initial_state_from_config(
                          RunConfig::from_string("x0.kind = file\nx0.path = " + saved + "\n", "t"),
                          other, 1),
                      PreconditionError);
    REQUIRE_THROWS_AS(cli::initial_state_from_config(
                          RunConfig::from_string("x0.kind = comet\n", "t"), grid, 1),
                      PreconditionError);
}

TEST_CASE("matrices parse from indexed entries", "[cli]") {
    auto cfg = RunConfig{};
    cfg.set("system.A", "0 0 : 1 2");
    cfg.set("system.A", "1 1 : -3");
    cfg.set("system.A", "1 1 : 1");  // accumulates
    const MatC A = cli::matrix_from_config(cfg, "system.A", 2, 2);
    REQUIRE(A(0, 0) == cd(1.0, 2.0));
    REQUIRE(A(1, 1) == cd(-2.0, 0.0));
    REQUIRE(A(0, 1) == cd(0.0, 0.0));

    cfg.set("system.B", "5 0 : 1");
    REQUIRE_THROWS_AS(cli::matrix_from_config(cfg, "system.B", 2, 1), PreconditionError);
    cfg.set("system.C", "0 0");
    REQUIRE_THROWS_AS(cli::matrix_from_config(cfg, "system.C", 1, 1), PreconditionError);
}

TEST_CASE("config sources merge in order with overrides last", "[cli]") {
    cli::Common com;
    com.config_path = write_file("merge_base.cfg", "grid.n = 64\nkeep = base\n");
    com.symbol_config = write_file("merge_extra.cfg", "grid.n = 128\n");
    com.overrides = {"grid.n=256", "added = yes"};
    const auto cfg = cli::load_config(com);
    REQUIRE(cfg.get_int("grid.n") == 256);
    REQUIRE(cfg.get_all("grid.n").size() == 3);
    REQUIRE(cfg.get("keep") == "base");
    REQUIRE(cfg.get("added") == "yes");
    com.overrides = {"broken"};
    REQUIRE_THROWS_AS(cli::load_config(com), PreconditionError);
}

TEST_CASE("symbol-check runs and honors --set overrides", "[cli]") {
    const auto cfgp = write_file("heat.cfg", kHeatConfig);
    const auto out = (work_dir() / "out_symbol").string();
    REQUIRE(run_tool("symbol-check --config " + cfgp + " --out-dir " + out) == 0);
    const auto text = read_file(out + "/symbol_check.csv");
    REQUIRE(text.find("lambda_threshold") != std::string::npos);
    REQUIRE(text.find("power,2") != std::string::npos);

    REQUIRE(run_tool("symbol-check --config " + cfgp + " --out-dir " + out +
                     " --set symbol.s=0.5") == 0);
    REQUIRE(read_file(out + "/symbol_check.csv").find("power,1") != std::string::npos);
}

TEST_CASE("uncertainty output is deterministic for a fixed seed", "[cli]") {
    const auto cfgp = write_file("unc.cfg",
                                 "grid.n = 64\ngrid.ell = 32\nset.kind = alternating\n"
                                 "uncertainty.trials = 8\n");
    const auto o1 = (work_dir() / "unc1").string();
    const auto o2 = (work_dir() / "unc2").string();
    const std::string args = "uncertainty --config " + cfgp + " --lambda 0.15 0.5 --seed 11";
    REQUIRE(run_tool(args + " --out-dir " + o1) == 0);
    REQUIRE(run_tool(args + " --out-dir " + o2) == 0);
    const auto t1 = read_file(o1 + "/uncertainty.csv");
    REQUIRE(t1 == read_file(o2 + "/uncertainty.csv"));
    REQUIRE(t1.find("fit.d0") != std::string::npos);
    REQUIRE(t1.find("lambda,c1_hat,majorant") != std::string::npos);
}

TEST_CASE("dissipation rejects bands below the threshold", "[cli]") {
    const auto cfgp = write_file("drift.cfg",
                                 "grid.n = 64\ngrid.ell = 32\n"
                                 "symbol.dimension = 1\nsymbol.degree = 2\n"
                                 "symbol.coeff = 2 : 1\nsymbol.s = 1\nsymbol.b = 1 : -0.2\n");
    const auto out = (work_dir() / "out_diss").string();
    REQUIRE(run_tool("dissipation --config " + cfgp + " --lambda 4 --out-dir " + out) == 2);

    const auto okcfg = write_file("heat_diss.cfg", kHeatConfig);
    REQUIRE(run_tool("dissipation --config " + okcfg + " --lambda 4 --out-dir " + out) == 0);
    REQUIRE(read_file(out + "/dissipation.csv").find("lambda,t,measured") != std::string::npos);
}

TEST_CASE("regimes reports infeasibility through the exit code", "[cli]") {
    const auto bad = write_file("reg_bad.cfg",
                                "mode = params\nregime.gamma1 = 1\nregime.gamma2 = 0.5\n"
                                "regime.gamma3 = 0.3\nregime.omega = 0.1\n");
    const auto out = (work_dir() / "out_reg").string();
    REQUIRE(run_tool("regimes --config " + bad + " --out-dir " + out) == 3);
    REQUIRE(read_file(out + "/regimes.csv").find("infeasible") != std::string::npos);

    const auto good = write_file("reg_good.cfg",
                                 "mode = params\nregime.gamma1 = 1\nregime.gamma2 = 0.5\n"
                                 "regime.gamma3 = 1\n");
    REQUIRE(run_tool("regimes --config " + good + " --out-dir " + out) == 0);
    const auto text = read_file(out + "/regimes.csv");
    REQUIRE(text.find("case,lambda,T,alpha") != std::string::npos);
}

TEST_CASE("stabilize writes trajectory, period, and state artifacts", "[cli]") {
    const auto cfgp = write_file("stab.cfg", std::string(kHeatConfig) +
                                                "set.kind = alternating\n"
                                                "control.T = 2\ncontrol.alpha = 0.5\n"
                                                "control.periods = 2\ncontrol.nt = 9\n"
                                                "x0.kind = gaussian\n");
    const auto out = (work_dir() / "out_stab").string();
    REQUIRE(run_tool("stabilize --config " + cfgp + " --out-dir " + out + " --plot") == 0);
    const auto traj = read_file(out + "/trajectory.csv");
    REQUIRE(traj.find("# alpha_achieved = ") != std::string::npos);
    REQUIRE(traj.find("time,norm") != std::string::npos);
    const auto per = read_file(out + "/periods.csv");
    REQUIRE(per.find("period,factor,cost") != std::string::npos);
    REQUIRE(fs::exists(out + "/initial_state.bin"));
    REQUIRE(read_file(out + "/trajectory.svg").find("<svg") != std::string::npos);

    const auto x0 = load_state(out + "/initial_state.bin");
    REQUIRE(lp_norm(x0, 2.0) == Catch::Approx(1.0));
}

TEST_CASE("duality-check writes a verdict and exits by it", "[cli]") {
    const auto cfgp = write_file("dual.cfg",
                                 "system.n = 1\nsystem.m = 1\n"
                                 "system.A = 0 0 : 0\nsystem.B = 0 0 : 1\n"
                                 "system.T = 1\ncheck.C = 0.5\ncheck.alpha = 0.6\n"
                                 "check.dirs = 8\n");
    const auto out = (work_dir() / "out_dual").string();
    REQUIRE(run_tool("duality-check --config " + cfgp + " --out-dir " + out) == 0);
    const auto verdict = nlohmann::json::parse(read_file(out + "/duality.json"));
    REQUIRE(verdict["pass"].get<bool>());
    REQUIRE(verdict["alpha_primal"].get<double>() == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(verdict["alpha_dual"].get<double>() == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(verdict["worst_primal_direction"].size() == 1);
}

TEST_CASE("usage errors exit with the argument-error code", "[cli]") {
    REQUIRE(run_tool("stabilize --nope") == 2);
    REQUIRE(run_tool("") == 2);
    REQUIRE(run_tool("uncertainty --config /nonexistent/x.cfg") == 2);
    REQUIRE(run_tool("--help") == 0);
}
