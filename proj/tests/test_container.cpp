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


#include "iltm/container.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace iltm;

TEST_CASE("container round-trips tensors, ints, scalars and metadata") {
  Container c;
  Mat m(2, 3);
  m << 1, 2, 3, 4, 5, 6.25;
  c.put("m", m);
  c.put_ints("ints", std::vector<int>{-3, 0, 7});
  c.put_scalar("s", 0.1);
  c.meta["kind"] = "test";

  const Container d = Container::deserialize(c.serialize());
  CHECK(d.get_mat("m") == m);
  CHECK(d.get_ints("ints") == std::vector<int>{-3, 0, 7});
  CHECK(d.get_scalar("s") == 0.1);
  CHECK(d.get_meta("kind") == "test");
  CHECK(d.serialize() == c.serialize());
}

TEST_CASE("insertion order does not change the bytes") {
  Container a, b;
  a.put_scalar("x", 1.0);
  a.put_scalar("y", 2.0);
  b.put_scalar("y", 2.0);
  b.put_scalar("x", 1.0);
  CHECK(a.serialize() == b.serialize());
}

TEST_CASE("file save, load, save yields identical bytes") {
  const auto dir = iltm_test::scratch_dir("container");
  Container c;
  c.put("v", std::vector<double>{1.5, -2.0});
  c.save(dir / "a.iltm");
  Container::load(dir / "a.iltm").save(dir / "b.iltm");
  CHECK(Container::load(dir / "a.iltm").serialize() == Container::load(dir / "b.iltm").serialize());
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed input and missing names are data errors") {
  CHECK_THROWS_AS(Container::deserialize("nope"), DataError);
  Container c;
  c.put_scalar("s", 1.0);
  std::string bytes = c.serialize();
  CHECK_THROWS_AS(Container::deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  CHECK_THROWS_AS(c.get("absent"), DataError);
  CHECK_THROWS_AS(c.get_meta("absent"), DataError);
}
