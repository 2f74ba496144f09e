#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string config_dir = HEOM_CONFIG_DIR;

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("heomctl_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

int heomctl(const std::string& args) {
    const std::string cmd = std::string(HEOMCTL_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t col(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        REQUIRE(it != header.end());
        return static_cast<std::size_t>(it - header.begin());
    }
};

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Csv c;
    std::string line, cell;
    std::getline(in, line);
    std::stringstream hs(line);
    while (std::getline(hs, cell, ',')) c.header.push_back(cell);
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        c.rows.push_back(row);
    }
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string shipped_text(const std::string& name) { return slurp(fs::path(config_dir) / (name + ".toml")); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

} // namespace

TEST_CASE("field-free run writes a damped 12.3 fs oscillation") {
    Scratch s("field_free");
    REQUIRE(heomctl("propagate -c " + config_dir + "/field_free.toml -o " + s.dir.string()) == 0);
    const auto c = read_csv(s.dir / "trajectory.csv");
    CHECK(c.header == std::vector<std::string>{"t_fs", "rho11", "rho22", "Re_rho12", "Im_rho12", "X1_11", "X1_22", "E_t"});
    const auto t = c.col("t_fs"), p = c.col("rho11");
    std::vector<double> minima;
    for (std::size_t i = 1; i + 1 < c.rows.size(); ++i)
        if (c.rows[i][p] < c.rows[i - 1][p] && c.rows[i][p] <= c.rows[i + 1][p]) minima.push_back(c.rows[i][t]);
    REQUIRE(minima.size() >= 3);
    const double period = (minima.back() - minima.front()) / static_cast<double>(minima.size() - 1);
    CHECK(period == doctest::Approx(12.3).epsilon(0.05));
    CHECK(c.rows.back()[t] == doctest::Approx(40.0));

    const auto manifest = nlohmann::json::parse(slurp(s.dir / "manifest.json"));
    CHECK(manifest["mode"] == "propagate");
    CHECK(manifest["diagnostics"]["max_trace_defect"].get<double>() < 1e-8);
    CHECK(manifest.contains("code_version"));
    CHECK(manifest.contains("wall_time_s"));
    CHECK(manifest["config"]["system"].contains("heom_level"));
}

TEST_CASE("closed-system swap reaches the target") {
    Scratch s("swap");
    REQUIRE(heomctl("optimize -c " + config_dir + "/c1_swap.toml -o " + s.dir.string()) == 0);
    const auto f = read_csv(s.dir / "fidelity.csv");
    CHECK(f.header == std::vector<std::string>{"iter", "fidelity", "max_amp"});
    CHECK(f.rows.back()[1] > 0.99);
    const auto e = read_csv(s.dir / "field_optimal.csv");
    CHECK(e.header == std::vector<std::string>{"t_fs", "E_au"});
    for (const auto& r : e.rows) CHECK(std::abs(r[1]) <= 1e-2);
    CHECK(fs::exists(s.dir / "trajectory.csv"));
}

TEST_CASE("witness flag and correlation export") {
    Scratch s("witness");
    REQUIRE(heomctl("propagate --witness -c " + config_dir + "/field_free.toml -o " + s.dir.string()) == 0);
    const auto w = read_csv(s.dir / "witness.csv");
    CHECK(w.header == std::vector<std::string>{"t_fs", "V", "Gamma", "g1", "g2", "g3", "w1", "w2", "w3", "S_rho"});
    CHECK(w.rows.front()[w.col("V")] == doctest::Approx(1.0));
    const auto d = nlohmann::json::parse(slurp(s.dir / "decomposition.json"));
    CHECK(d.contains("points"));

    REQUIRE(heomctl("correlation -c " + config_dir + "/field_free.toml -o " + s.dir.string()) == 0);
    const auto c = read_csv(s.dir / "correlation.csv");
    CHECK(c.header == std::vector<std::string>{"t_fs", "Re_C", "Im_C", "Abs_C"});
    CHECK(c.rows.back()[0] == doctest::Approx(100.0));
}

TEST_CASE("scans") {
    Scratch s("scan");
    REQUIRE(heomctl("scan -c " + config_dir + "/field_free.toml --param heom_level --values 2,4,6,7 -o " + s.dir.string()) == 0);
    auto c = read_csv(s.dir / "scan.csv");
    CHECK(c.header == std::vector<std::string>{"value", "final_fidelity", "max_deviation", "c0_rel_error"});
    REQUIRE(c.rows.size() == 4);
    for (std::size_t i = 1; i < c.rows.size(); ++i) CHECK(c.rows[i][2] < c.rows[i - 1][2]);
    const auto manifest = nlohmann::json::parse(slurp(s.dir / "manifest.json"));
    CHECK(manifest["summary"]["runtimes"].size() == 4);

    REQUIRE(heomctl("scan -c " + config_dir + "/field_free.toml --param matsubara --values 0,1,2,4 -o " + s.dir.string()) == 0);
    c = read_csv(s.dir / "scan.csv");
    for (std::size_t i = 1; i < c.rows.size(); ++i) CHECK(c.rows[i][3] < c.rows[i - 1][3]);

    const fs::path cfg = s.dir / "scan.toml";
    write(cfg, shipped_text("c1_swap") + "\n[scan]\nparameter = \"amp_cap\"\nvalues = [2e-3, 1e-2]\nbase = \"optimize\"\n");
    REQUIRE(heomctl("scan -c " + cfg.string() + " -o " + s.dir.string()) == 0);
    c = read_csv(s.dir / "scan.csv");
    REQUIRE(c.rows.size() == 2);
    CHECK(c.rows[1][1] > 0.99);
}

TEST_CASE("exit codes") {
    Scratch s("exit");
    CHECK(heomctl("") == 1);
    CHECK(heomctl("propagate -c /nonexistent.toml") == 1);

    const fs::path cold = s.dir / "cold.toml";
    write(cold, replace(shipped_text("field_free"), "temperature_K = 298.0", "temperature_K = 0.0"));
    CHECK(heomctl("propagate -c " + cold.string() + " -o " + s.dir.string()) == 2);

    const fs::path unknown = s.dir / "unknown.toml";
    write(unknown, replace(shipped_text("field_free"), "w_eV = 0.13", "w_eV = 0.13\ncolour = \"blue\""));
    CHECK(heomctl("propagate -c " + unknown.string() + " -o " + s.dir.string()) == 2);

    const fs::path bare = s.dir / "bare.toml";
    write(bare, replace(shipped_text("field_free"), "delta_eV", "delta"));
    CHECK(heomctl("propagate -c " + bare.string() + " -o " + s.dir.string()) == 2);

    const fs::path empty = s.dir / "empty.toml";
    write(empty, shipped_text("field_free") + "\n[scan]\nparameter = \"heom_level\"\nvalues = []\n");
    CHECK(heomctl("scan -c " + empty.string() + " -o " + s.dir.string()) == 2);

    const fs::path big = s.dir / "big.toml";
    write(big, shipped_text("field_free") + "\n[tolerances]\nmax_ados = 100\n");
    CHECK(heomctl("propagate -c " + big.string() + " -o " + s.dir.string()) == 4);

    const fs::path stiff = s.dir / "stiff.toml";
    write(stiff, shipped_text("field_free") + "\n[tolerances]\nrk_rel = 1e-300\nrk_abs = 1e-300\n");
    CHECK(heomctl("propagate -c " + stiff.string() + " -o " + s.dir.string()) == 3);
}

TEST_CASE("outputs are byte-identical across repeats and thread counts") {
    Scratch s("determinism");
    const std::vector<std::string> files{"trajectory.csv", "witness.csv", "decomposition.json"};
    std::vector<std::string> ref;
    for (const std::string threads : {"1", "1", "2", "4"}) {
        const fs::path out = s.dir / ("t" + threads + std::to_string(ref.size()));
        REQUIRE(heomctl("propagate --witness --threads " + threads + " -c " + config_dir + "/driven.toml -o " + out.string()) == 0);
        std::string all;
        for (const auto& f : files) all += slurp(out / f);
        if (ref.empty()) ref.push_back(all);
        else CHECK(all == ref.front());
        ref.push_back(all);
    }
}
