#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "hbundle/cli.hpp"

using namespace hbundle;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    int code = -1;
    std::string out;
};

// Runs the installed binary with stderr folded into stdout.
Outcome run_cli(const std::string& args)
{
    const std::string cmd = std::string(HBUNDLE_CLI_PATH) + " " + args + " 2>&1";
    Outcome o;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return o;
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;)
        o.out.append(buf, n);
    const int status = pclose(pipe);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

std::string samples(const char* name) { return std::string(HBUNDLE_SAMPLES_DIR) + "/" + name; }

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("hbundle_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<int> parse(std::vector<std::string> args, RunSpec& spec, std::string* err_text = nullptr)
{
    args.insert(args.begin(), "hbundle");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const auto code = parse_args(static_cast<int>(argv.size()), argv.data(), spec, out, err);
    if (err_text)
        *err_text = err.str();
    return code;
}

} // namespace

TEST(ParseArgs, DefaultsAndOverrides)
{
    RunSpec spec;
    ASSERT_FALSE(parse({"--nodes", "n.txt", "--edges", "e.txt", "--sigma", "12", "--lambda", "0.8", "--workers",
                        "2", "--bins", "auto", "--criterion", "od"},
                       spec));
    EXPECT_EQ(spec.nodes_path, "n.txt");
    EXPECT_EQ(spec.criterion, "od");
    EXPECT_EQ(spec.bins, "auto");
    ASSERT_TRUE(spec.config.sigma);
    EXPECT_EQ(*spec.config.sigma, 12.0);
    EXPECT_EQ(spec.config.lambda, 0.8);
    EXPECT_EQ(spec.config.workers, 2u);
    EXPECT_EQ(spec.config.grid_size, 800);
    EXPECT_FALSE(spec.config.h_max);
}

TEST(ParseArgs, ParseErrorsExitTwo)
{
    RunSpec spec;
    std::string err;
    EXPECT_EQ(parse({"--nodes", "n", "--edges", "e", "--no-such-flag"}, spec), 2);
    EXPECT_EQ(parse({"--nodes", "n", "--edges", "e", "--iterations", "ten"}, spec), 2);
    RunSpec fresh;
    EXPECT_EQ(parse({"--nodes", "n"}, fresh, &err), 2);
    EXPECT_NE(err.find("--edges"), std::string::npos);
    EXPECT_EQ(parse({"--help"}, spec), 0);
}

TEST(Cli, HappyPathWritesSvgAndTiming)
{
    const auto dir = scratch_dir("happy");
    const auto svg = dir / "out.svg";
    const auto o = run_cli("--nodes " + samples("nodes.txt") + " --edges " + samples("edges.txt") +
                           " --criterion none --grid 200 --svg " + svg.string());
    EXPECT_EQ(o.code, 0) << o.out;
    ASSERT_TRUE(fs::exists(svg));
    EXPECT_NE(slurp(svg).find("</svg>"), std::string::npos);
    EXPECT_TRUE(std::regex_search(o.out, std::regex(R"(bundling [0-9.]+ s)"))) << o.out;
}

TEST(Cli, AllOutputsWritten)
{
    const auto dir = scratch_dir("outputs");
    const auto o = run_cli("--nodes " + samples("nodes.txt") + " --edges " + samples("edges.txt") +
                           " --criterion orientation --bins 4 --grid 160 --iterations 3 --png " +
                           (dir / "o.png").string() + " --png-size 200 --polylines " + (dir / "o.txt").string() +
                           " --metrics " + (dir / "m.csv").string() + " --density " + (dir / "d.pgm").string());
    ASSERT_EQ(o.code, 0) << o.out;
    EXPECT_NE(o.out.find("criterion orientation: 4 bin(s)"), std::string::npos) << o.out;
    EXPECT_GT(fs::file_size(dir / "o.png"), 8u);
    EXPECT_EQ(slurp(dir / "d.pgm").rfind("P5", 0), 0u);

    std::istringstream metrics(slurp(dir / "m.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(metrics, line))
        lines.push_back(line);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0].rfind("iteration,", 0), 0u);
    EXPECT_EQ(lines[4].rfind("summary,", 0), 0u);

    std::ifstream poly(dir / "o.txt");
    const auto records = import_polylines(poly);
    EXPECT_EQ(records.size(), 261u);
}

TEST(Cli, MissingInputExitsOneAndNamesPath)
{
    const auto o = run_cli("--nodes /nonexistent/nodes.txt --edges " + samples("edges.txt"));
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.out.find("/nonexistent/nodes.txt"), std::string::npos) << o.out;
}

TEST(Cli, MalformedInputExitsOne)
{
    const auto dir = scratch_dir("malformed");
    std::ofstream(dir / "n.txt") << "a 0 0\nb 1 1\n";
    std::ofstream(dir / "e.txt") << "a zz\n";
    const auto o = run_cli("--nodes " + (dir / "n.txt").string() + " --edges " + (dir / "e.txt").string());
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.out.find("unknown node 'zz' at line 1"), std::string::npos) << o.out;
}

TEST(Cli, BadFlagExitsTwo)
{
    EXPECT_EQ(run_cli("--nodes a --edges b --grid").code, 2);
    EXPECT_EQ(run_cli("--bogus").code, 2);
}

TEST(Cli, OriginDestinationAutoBinsInRange)
{
    const auto o = run_cli("--nodes " + samples("nodes.txt") + " --edges " + samples("edges.txt") +
                           " --criterion od --bins auto --grid 160 --iterations 2");
    ASSERT_EQ(o.code, 0) << o.out;
    std::smatch m;
    ASSERT_TRUE(std::regex_search(o.out, m, std::regex(R"(criterion od: (\d+) bin)"))) << o.out;
    const int b = std::stoi(m[1]);
    EXPECT_GE(b, 4);
    EXPECT_LE(b, 16);
}

TEST(Cli, BenchPrintsOneRowPerSizeAndBinCount)
{
    const auto o = run_cli("--bench --bench-sizes 400,800 --bench-bins 1,4 --grid 200");
    ASSERT_EQ(o.code, 0) << o.out;
    std::istringstream lines(o.out);
    std::string line;
    int rows = 0;
    bool header = false;
    while (std::getline(lines, line)) {
        if (line == "edges,samples,bins,seconds") {
            header = true;
            continue;
        }
        if (std::regex_match(line, std::regex(R"(\d+,\d+,\d+,[0-9.e+-]+)")))
            ++rows;
    }
    EXPECT_TRUE(header) << o.out;
    EXPECT_EQ(rows, 4) << o.out;
}
