#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int code;
    std::string out;
};

Run kql(const std::string& args) {
    std::string cmd = std::string(KQL_BINARY) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const std::string& f) { return std::string(KQL_DATA) + "/" + f; }

bool has(const Run& r, const std::string& s) { return r.out.find(s) != std::string::npos; }

} // namespace

TEST_CASE("check") {
    auto r = kql("check " + data("k1.json") + " --alpha a --formula 'dia[R] P(x1)'");
    CHECK(r.code == 0);
    CHECK(r.out == "true\n");
    r = kql("check " + data("k1.json") + " --alpha c --formula 'dia[R] P(x1)'");
    CHECK(r.code == 1);
    CHECK(r.out == "false\n");
    r = kql("check " + data("k1.json") + " --alpha a --formula-file " + data("formulas.txt"));
    CHECK(r.code == 1);
    CHECK(has(r, "dia[R] P(x1): true"));
    CHECK(has(r, "dia[R] dia[R] dia[R] true: false"));
    r = kql("check " + data("k1.json") + " --alpha a --formula 'dia[R] P(x1)' --trace");
    CHECK(has(r, "P(x1)  ->  {b}"));
    r = kql("check " + data("k1.json") + " --alpha a,b --k 2 --formula 'eq(x1,x2)' --eq");
    CHECK(r.code == 1);
    CHECK(kql("check " + data("k1.json") + " --alpha a --formula 'all P(x1)' --oracle").code == 1);
}

TEST_CASE("errors") {
    auto r = kql("check " + data("bad.json") + " --alpha a --formula true");
    CHECK(r.code == 2);
    CHECK(has(r, "error [parse_error]"));
    CHECK(has(r, "line 3"));
    r = kql("check " + data("k1.json") + " --alpha a --formula 'Q(x1)'");
    CHECK(r.code == 2);
    CHECK(has(r, "signature_mismatch"));
    CHECK(kql("bisim " + data("k1.json")).code == 2);
    CHECK(kql("verify nope").code == 2);
    CHECK(kql("bisim " + data("k1.json") + " " + data("k1.json") + " --alpha z --beta a").code == 2);
}

TEST_CASE("bisim") {
    auto r = kql("bisim " + data("k1.json") + " " + data("k1.json") + " --alpha a --beta a");
    CHECK(r.code == 0);
    CHECK(r.out == "bisimilar\n");
    r = kql("bisim " + data("k1.json") + " " + data("k1.json") + " --alpha a --beta c");
    CHECK(r.code == 1);
    CHECK(r.out == "not bisimilar, failure round 1\n");
    r = kql("bisim " + data("k1.json") + " " + data("k1.json") + " --alpha a --beta c --rounds 0");
    CHECK(r.code == 0);
    CHECK(r.out == "equivalent up to 0 rounds\n");
    r = kql("bisim " + data("k1.json") + " " + data("k1.json"));
    CHECK(r.code == 0);
    CHECK(has(r, "a ~ a\n"));
    CHECK_FALSE(has(r, "a ~ c\n"));
    CHECK(has(r, "# stabilized at round 1"));
    r = kql("bisim " + data("k1.json") + " " + data("k1.json") + " --alpha a --beta a --strategy");
    CHECK(r.code == 0);
    CHECK(r.out.front() == '{');
}

TEST_CASE("charform and distinguish") {
    auto r = kql("charform " + data("k1.json") + " --alpha a --rank 0");
    CHECK(r.code == 0);
    CHECK(has(r, "P(x1)"));
    CHECK_FALSE(has(r, "dia"));
    r = kql("charform " + data("k1.json") + " --alpha a --rank 1");
    CHECK(has(r, "dia[R]"));
    r = kql("distinguish " + data("k1.json") + " " + data("k1.json") + " --alpha a --beta c");
    CHECK(r.code == 0);
    CHECK(has(r, "dia[R]"));
    r = kql("distinguish " + data("k1.json") + " " + data("k1.json") + " --alpha a --beta a");
    CHECK(r.code == 0);
    CHECK(r.out == "bisimilar\n");
    r = kql("distinguish " + data("k1.json") + " " + data("loop.json") + " --alpha a --beta u");
    CHECK(r.code == 0);
    CHECK(has(r, "R(x1,x1)"));
}

TEST_CASE("product") {
    auto r = kql("product " + data("k1.json") + " " + data("edge.json"));
    CHECK(r.code == 0);
    CHECK(has(r, "<a|u>"));
    r = kql("product " + data("k1.json") + " " + data("edge.json") + " --principal 0");
    CHECK(r.code == 0);
    CHECK_FALSE(has(r, "<a|v>"));
    r = kql("product " + data("k1.json") + " " + data("edge.json") + " --filter " + data("filter.json") +
            " --los --formula 'dia[R] P(x1)' --alphas 'a;v'");
    CHECK(r.code == 0);
    CHECK(has(r, "\"agree\": true"));
}

TEST_CASE("verify") {
    auto r = kql("verify hm --count 5");
    CHECK(r.code == 0);
    CHECK(has(r, "PASS"));
    r = kql("verify ef --count 20 --mutant drop-back");
    CHECK(r.code == 1);
    CHECK(has(r, "rerun: kql verify ef"));
    r = kql("verify quantifiers --count 3 --json");
    CHECK(r.code == 0);
    CHECK(has(r, "\"passed\": true"));
}
