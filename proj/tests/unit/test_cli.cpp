#include <fstream>
#include <sstream>

#include "badmarket/builders.hpp"
#include "badmarket/io.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "support.hpp"

using badmarket::cli::run;
using testing::data_path;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("solve") {
  SUBCASE("one-agent economy") {
    const Invocation r = invoke({"solve", data_path("one_agent.json")});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "price: good=0.5  bad=-0.5"));
    CHECK(contains(r.out, "status: verified equilibrium"));
  }
  SUBCASE("garbage economy writes a certificate") {
    testing::TempDir dir("cli");
    const Invocation r = invoke({"--out", dir.file("cert.json"), "solve", data_path("garbage_1200.json")});
    CHECK(r.code == 0);
    const badmarket::Economy e = badmarket::load_economy_file(data_path("garbage_1200.json"));
    const auto cert = badmarket::load_certificate(e, badmarket::read_text_file(dir.file("cert.json")));
    CHECK(testing::max_abs_diff(cert.price, testing::vec({-0.25, 0.25, 0.5})) <= 1e-6);
  }
  SUBCASE("no restarts") {
    const Invocation r = invoke({"--restarts", "0", "solve", data_path("one_agent.json")});
    CHECK(r.code == 2);
  }
  SUBCASE("malformed input") {
    testing::TempDir dir("cli");
    badmarket::write_text_file(dir.file("bad.json"), "{\"commodities\": ");
    CHECK(invoke({"solve", dir.file("bad.json")}).code == 3);
    CHECK(invoke({"solve", dir.file("absent.json")}).code == 3);
  }
  SUBCASE("runs are reproducible") {
    testing::TempDir dir("cli");
    CHECK(invoke({"--out", dir.file("a.json"), "solve", data_path("hara_10.json")}).code == 0);
    CHECK(invoke({"--out", dir.file("b.json"), "solve", data_path("hara_10.json")}).code == 0);
    CHECK(badmarket::read_text_file(dir.file("a.json")) == badmarket::read_text_file(dir.file("b.json")));
  }
}

TEST_CASE("verify") {
  CHECK(invoke({"verify", data_path("hara_10.json"), data_path("hara_10_oracle.json")}).code == 0);
  CHECK(invoke({"--tol", "1e-10", "verify", data_path("one_agent.json"), data_path("one_agent_certificate.json")})
            .code == 0);
  SUBCASE("a perturbed certificate fails") {
    testing::TempDir dir("cli");
    const badmarket::Economy e = badmarket::build_hara_economy(10);
    auto cert = badmarket::load_certificate(e, badmarket::read_text_file(data_path("hara_10_oracle.json")));
    cert.bundles[3][1] += 1e-3;
    badmarket::write_text_file(dir.file("moved.json"), badmarket::serialize_certificate(e, cert));
    const Invocation r = invoke({"verify", data_path("hara_10.json"), dir.file("moved.json")});
    CHECK(r.code == 1);
    CHECK(contains(r.out, "FAIL"));
  }
  SUBCASE("a certificate of another economy is an input error") {
    CHECK(invoke({"verify", data_path("one_agent.json"), data_path("garbage_reference.json")}).code == 3);
  }
}

TEST_CASE("quota") {
  const Invocation plain = invoke({"solve", data_path("one_agent.json")});
  const Invocation zero = invoke({"--quota", data_path("one_agent_zero_quota.json"), "quota", data_path("one_agent.json")});
  CHECK(zero.code == 0);
  CHECK(zero.out == plain.out);
  const Invocation gov = invoke({"--quota", data_path("one_agent_quota.json"), "quota", data_path("one_agent.json")});
  CHECK(gov.code == 0);
  CHECK(contains(gov.out, "rent government: 0.25"));
  testing::TempDir dir("cli");
  CHECK(invoke({"--quota", data_path("garbage_quota.json"), "--out", dir.file("q.json"), "quota",
                data_path("garbage_1200.json")})
            .code == 0);
  CHECK(invoke({"--quota", data_path("garbage_quota.json"), "verify", data_path("garbage_1200.json"),
                dir.file("q.json")})
            .code == 0);
  CHECK(invoke({"quota", data_path("one_agent.json")}).code == 3);
}

TEST_CASE("welfare") {
  const Invocation same = invoke({"welfare", data_path("one_agent.json"), "--compare",
                                  data_path("one_agent_certificate.json"), data_path("one_agent_certificate.json")});
  CHECK(same.code == 0);
  CHECK(contains(same.out, "verdict: no dominance"));
  const Invocation search =
      invoke({"welfare", data_path("one_agent.json"), "--search", data_path("one_agent_certificate.json"), "--samples",
              "2000"});
  CHECK(search.code == 0);
  CHECK(contains(search.out, "search:"));
  CHECK(invoke({"welfare", data_path("one_agent.json")}).code == 3);
}

TEST_CASE("family") {
  const Invocation r = invoke({"family", "--family", "hara", "--ns", "1,2,10"});
  CHECK(r.code == 0);
  CHECK(r.out == badmarket::read_text_file(data_path("hara_family_golden.csv")));
  CHECK(invoke({"family", "--family", "hara", "--ns", "1,2,10"}).out == r.out);
  CHECK(invoke({"family", "--family", "other", "--ns", "1"}).code == 3);
  CHECK(invoke({"family", "--family", "hara", "--ns", "1,x"}).code == 3);
  CHECK(invoke({"--restarts", "0", "family", "--family", "hara", "--ns", "2"}).code == 2);
}

TEST_CASE("oracle") {
  testing::TempDir dir("cli");
  CHECK(invoke({"--out", dir.file("h.json"), "oracle", "--family", "hara", "--n", "10"}).code == 0);
  CHECK(badmarket::read_text_file(dir.file("h.json")) == badmarket::read_text_file(data_path("hara_10_oracle.json")));
  CHECK(invoke({"oracle", "--family", "garbage"}).code == 0);
}

TEST_CASE("usage") {
  CHECK(invoke({}).code == 3);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"frobnicate"}).code == 3);
}
