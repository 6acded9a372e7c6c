/*
 * Copyright 2026 The iltm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "iltm/config.hpp"
#include "iltm/common.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <fstream>

using namespace iltm;

namespace {

RunConfig demo() {
  return RunConfig("demo", {{"alpha", "0.5", "mix"}, {"steps", "100", "budget"}, {"flag", "true", "switch"},
                            {"seed", "0", "seed"}});
}

}  // namespace

TEST_CASE("key=value parsing") {
  const auto kv = parse_key_values("# comment\n\n a = 1 \nb=two words\r\nc=\n");
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"a", "1"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"b", "two words"});
  CHECK(kv[2] == std::pair<std::string, std::string>{"c", ""});
  CHECK_THROWS_AS(parse_key_values("a=1\na=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("=3\n"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
  RunConfig rc = demo();
  CHECK_THROWS_AS(rc.set("beta", "1"), ConfigError);
  CHECK_THROWS_AS(rc.load_text("alpha=0.1\nbeta=2\n"), ConfigError);
  CHECK_THROWS_AS(rc.get("beta"), ConfigError);
}

TEST_CASE("typed getters validate") {
  RunConfig rc = demo();
  CHECK(rc.get_double("alpha") == 0.5);
  CHECK(rc.get_int("steps") == 100);
  CHECK(rc.get_bool("flag"));
  CHECK(rc.get_u64("seed") == 0);
  rc.set("steps", "12x");
  CHECK_THROWS_AS(rc.get_int("steps"), ConfigError);
  rc.set("flag", "maybe");
  CHECK_THROWS_AS(rc.get_bool("flag"), ConfigError);
  rc.set("seed", "18446744073709551615");
  CHECK(rc.get_u64("seed") == 18446744073709551615ull);
  rc.set("seed", "-1");
  CHECK_THROWS_AS(rc.get_u64("seed"), ConfigError);
  CHECK(parse_bool("yes"));
  CHECK_FALSE(parse_bool("off"));
}

TEST_CASE("manifest lists every key and depends only on effective values") {
  RunConfig rc = demo();
  rc.set("steps", "7");
  const std::string m = rc.manifest();
  CHECK(m.find("command: demo") != std::string::npos);
  CHECK(m.find("steps=7\n") < m.find("# defaults"));
  for (const char* k : {"alpha=0.5\n", "flag=true\n", "seed=0\n"}) {
    CHECK(m.find(k) > m.find("# defaults"));
    CHECK(m.find(k) != std::string::npos);
  }
  CHECK(rc.defaulted("alpha"));
  CHECK_FALSE(rc.defaulted("steps"));

  // Setting a key to its default is indistinguishable from leaving it.
  RunConfig same = demo();
  same.set("steps", "7");
  same.set("alpha", "0.5");
  CHECK(same.manifest() == m);
}

TEST_CASE("manifest reload reproduces the configuration") {
  RunConfig rc = demo();
  rc.set("alpha", "0.25");
  rc.set("flag", "false");
  const auto dir = iltm_test::scratch_dir("config_manifest");
  rc.write_manifest(dir / "manifest.txt");
  RunConfig back = demo();
  back.load_file(dir / "manifest.txt");
  CHECK(back.manifest() == rc.manifest());
  CHECK(back.get("alpha") == "0.25");
  CHECK_THROWS_AS(back.load_file(dir / "absent.txt"), ConfigError);
}
