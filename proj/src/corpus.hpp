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

// Question items, the category taxonomy and the frozen item list.

#ifndef SELGATE_CORPUS_HPP_
#define SELGATE_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace selgate::corpus {

enum class Category : std::uint8_t { kCW, kCH, kTN, kTC, kTP, kDO, kDL, kDC };
enum class Group : std::uint8_t { kCausal, kTemporal, kDescriptive };

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::kCW, Category::kCH, Category::kTN, Category::kTC,
    Category::kTP, Category::kDO, Category::kDL, Category::kDC};
inline constexpr std::array<Group, 3> kAllGroups = {
    Group::kCausal, Group::kTemporal, Group::kDescriptive};

std::string_view CategoryCode(Category c);
std::string_view GroupName(Group g);
// Throws a data error for codes outside the taxonomy.
Category ParseCategory(std::string_view code);
Group GroupOf(Category c);
Group GroupOf(std::string_view code);
std::vector<Category> MemberCodes(Group g);

struct Item {
  std::string question_id;
  std::string video_id;
  std::string question;
  std::array<std::string, kNumLabels> options;  // indexed by Label
  Label answer = Label::kA;
  Category category = Category::kCW;

  Group group() const { return GroupOf(category); }
  bool operator==(const Item&) const = default;
};

// Parses one JSONL record per non-blank line. Errors carry the 1-based line.
std::vector<Item> ParseItems(std::istream& in);
std::vector<Item> LoadItems(const std::filesystem::path& path);
std::string SerializeItems(const std::vector<Item>& items);
std::string SerializeItem(const Item& item);

struct FrozenItemList {
  std::vector<std::string> ids;
  std::size_t per_group_count = 0;
  std::uint64_t seed = 0;

  bool operator==(const FrozenItemList&) const = default;
};

// Seeded Fisher-Yates per group, then a prefix of `per_group`. Groups are
// emitted in Causal, Temporal, Descriptive order.
FrozenItemList FreezeStratified(const std::vector<Item>& items,
                                std::size_t per_group, std::uint64_t seed);

std::string SerializeFrozenList(const FrozenItemList& list);
FrozenItemList ParseFrozenList(std::string_view text);
FrozenItemList LoadFrozenList(const std::filesystem::path& path);

// Restricts `items` to `ids`, in list order. Unknown ids are a data error.
std::vector<Item> SelectItems(const std::vector<Item>& items,
                              const std::vector<std::string>& ids);

// question_id -> item lookup used by the metric code.
class AnswerKey {
 public:
  AnswerKey() = default;
  explicit AnswerKey(const std::vector<Item>& items);

  const Item* Find(std::string_view question_id) const;
  const Item& At(std::string_view question_id) const;  // data error if absent
  std::size_t size() const { return items_.size(); }

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace selgate::corpus

#endif  // SELGATE_CORPUS_HPP_
