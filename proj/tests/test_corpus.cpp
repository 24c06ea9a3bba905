// Copyright 2026 The Selgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>
#include <sstream>

#include "corpus.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace selgate;
using namespace selgate::corpus;

namespace {

const char* kLine =
    R"({"question_id":"q1","video_id":"v1","question":"why?","options":{"A":"a","B":"b","C":"c","D":"d","E":"e"},"answer":"B","category_code":"CW"})";

std::vector<Item> Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseItems(in);
}

std::string ErrorOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty file gives an empty list") {
  CHECK(Parse("").empty());
  CHECK(Parse("\n\n  \n").empty());
}

TEST_CASE("one valid line maps its fields") {
  const auto items = Parse(std::string(kLine) + "\n");
  REQUIRE(items.size() == 1);
  CHECK(items[0].question_id == "q1");
  CHECK(items[0].answer == Label::kB);
  CHECK(items[0].category == Category::kCW);
  CHECK(items[0].group() == Group::kCausal);
  CHECK(items[0].options[LabelIndex(Label::kE)] == "e");
}

TEST_CASE("four options names the missing label") {
  std::string line = kLine;
  line.replace(line.find(",\"E\":\"e\""), 8, "");
  const auto err = ErrorOf(line);
  CHECK(err.find("line 1") != std::string::npos);
  CHECK(err.find("missing label E") != std::string::npos);
}

TEST_CASE("malformed, duplicate and unknown-code lines are data errors") {
  CHECK(ErrorOf(std::string(kLine) + "\n{not json\n").find("line 2") != std::string::npos);
  CHECK(ErrorOf(std::string(kLine) + "\n" + kLine + "\n").find("duplicate") != std::string::npos);
  std::string bad = kLine;
  bad.replace(bad.find("\"CW\""), 4, "\"XX\"");
  CHECK(ErrorOf(bad).find("XX") != std::string::npos);
  std::string bad_answer = kLine;
  bad_answer.replace(bad_answer.find("\"answer\":\"B\""), 12, "\"answer\":\"F\"");
  CHECK_FALSE(ErrorOf(bad_answer).empty());
}

TEST_CASE("taxonomy lookups") {
  CHECK(GroupOf("TN") == Group::kTemporal);
  CHECK(GroupOf("DO") == Group::kDescriptive);
  CHECK(GroupOf("CH") == Group::kCausal);
  CHECK_THROWS_AS(GroupOf("XX"), Error);
  std::size_t total = 0;
  for (Group g : kAllGroups) {
    for (Category c : MemberCodes(g)) CHECK(GroupOf(c) == g);
    total += MemberCodes(g).size();
  }
  CHECK(total == 8);
}

TEST_CASE("items serialize and parse back") {
  auto items = testutil::MakeItems(40);
  items[3].question = "quote \" and\nnewline \\ tab\t";
  items[5].options[2] = "unicode \xc3\xa9";
  CHECK(Parse(SerializeItems(items)) == items);
}

TEST_CASE("freeze with per_group 0 is empty") {
  const auto list = FreezeStratified(testutil::MakeItems(24), 0, 1);
  CHECK(list.ids.empty());
}

TEST_CASE("freeze selects everything when forced") {
  // 3 per group: CW CH CW / TN TC TP / DO DL DC
  std::vector<Item> items;
  const char* codes[] = {"CW", "CH", "CW", "TN", "TC", "TP", "DO", "DL", "DC"};
  for (int i = 0; i < 9; ++i) items.push_back(testutil::MakeItem("id" + std::to_string(i), codes[i]));
  const auto list = FreezeStratified(items, 3, 42);
  REQUIRE(list.ids.size() == 9);
  std::set<std::string> ids(list.ids.begin(), list.ids.end());
  CHECK(ids.size() == 9);
  const AnswerKey key(items);
  for (std::size_t i = 0; i < 9; ++i) CHECK(key.At(list.ids[i]).group() == kAllGroups[i / 3]);
}

TEST_CASE("freeze is deterministic and seed dependent") {
  const auto items = testutil::MakeItems(300);
  const auto a = SerializeFrozenList(FreezeStratified(items, 30, 7));
  const auto b = SerializeFrozenList(FreezeStratified(items, 30, 7));
  CHECK(a == b);
  CHECK(a != SerializeFrozenList(FreezeStratified(items, 30, 8)));
  CHECK(ParseFrozenList(a) == FreezeStratified(items, 30, 7));
}

TEST_CASE("freeze names a short group") {
  try {
    FreezeStratified(testutil::MakeItems(16), 5, 1);  // 4 causal, 6 temporal, 6 descriptive
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("Causal") != std::string::npos);
  }
}

TEST_CASE("select items keeps list order and rejects unknown ids") {
  const auto items = testutil::MakeItems(10);
  const auto sel = SelectItems(items, {"q7", "q2"});
  REQUIRE(sel.size() == 2);
  CHECK(sel[0].question_id == "q7");
  CHECK(sel[1].question_id == "q2");
  CHECK_THROWS_AS(SelectItems(items, {"nope"}), Error);
}

TEST_CASE("frozen list rejects repeated ids") {
  CHECK_THROWS_AS(ParseFrozenList(R"({"ids":["a","a"],"per_group_count":1,"seed":0})"), Error);
}
