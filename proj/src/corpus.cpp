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

#include "corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "rng.hpp"

namespace selgate::corpus {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 8> kCodes = {"CW", "CH", "TN", "TC",
                                                     "TP", "DO", "DL", "DC"};

std::string RequireString(const ordered_json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Item ItemFromJson(const ordered_json& rec) {
  if (!rec.is_object()) throw std::invalid_argument("record is not an object");
  static const std::set<std::string> kKnown = {
      "question_id", "video_id", "question", "options", "answer", "category_code"};
  for (const auto& [key, _] : rec.items()) {
    if (!kKnown.count(key)) throw std::invalid_argument("unknown field '" + key + "'");
  }
  Item item;
  item.question_id = RequireString(rec, "question_id");
  item.video_id = RequireString(rec, "video_id");
  item.question = RequireString(rec, "question");
  if (item.question_id.empty()) throw std::invalid_argument("empty question_id");
  if (item.video_id.empty()) throw std::invalid_argument("empty video_id");

  auto opts = rec.find("options");
  if (opts == rec.end()) throw std::invalid_argument("missing field 'options'");
  if (!opts->is_object()) throw std::invalid_argument("field 'options' must be an object");
  for (const auto& [key, value] : opts->items()) {
    if (!ParseLabel(key)) throw std::invalid_argument("unexpected option label '" + key + "'");
    if (!value.is_string()) throw std::invalid_argument("option " + key + " must be a string");
  }
  for (Label label : kAllLabels) {
    auto it = opts->find(LabelString(label));
    if (it == opts->end()) {
      throw std::invalid_argument("options missing label " + LabelString(label));
    }
    item.options[LabelIndex(label)] = it->get<std::string>();
  }

  const std::string answer = RequireString(rec, "answer");
  auto label = ParseLabel(answer);
  if (!label) throw std::invalid_argument("answer '" + answer + "' is not an option label");
  item.answer = *label;

  const std::string code = RequireString(rec, "category_code");
  item.category = ParseCategory(code);
  return item;
}

}  // namespace

std::string_view CategoryCode(Category c) {
  return kCodes[static_cast<std::size_t>(c)];
}

std::string_view GroupName(Group g) {
  switch (g) {
    case Group::kCausal: return "Causal";
    case Group::kTemporal: return "Temporal";
    case Group::kDescriptive: return "Descriptive";
  }
  return "?";
}

Category ParseCategory(std::string_view code) {
  for (std::size_t i = 0; i < kCodes.size(); ++i) {
    if (kCodes[i] == code) return static_cast<Category>(i);
  }
  ThrowData("unknown category_code '" + std::string(code) + "'");
}

Group GroupOf(Category c) {
  switch (c) {
    case Category::kCW:
    case Category::kCH:
      return Group::kCausal;
    case Category::kTN:
    case Category::kTC:
    case Category::kTP:
      return Group::kTemporal;
    case Category::kDO:
    case Category::kDL:
    case Category::kDC:
      return Group::kDescriptive;
  }
  ThrowData("invalid category");
}

Group GroupOf(std::string_view code) { return GroupOf(ParseCategory(code)); }

std::vector<Category> MemberCodes(Group g) {
  std::vector<Category> out;
  for (Category c : kAllCategories) {
    if (GroupOf(c) == g) out.push_back(c);
  }
  return out;
}

std::vector<Item> ParseItems(std::istream& in) {
  std::vector<Item> items;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    Item item;
    try {
      item = ItemFromJson(ordered_json::parse(line));
    } catch (const ordered_json::exception& e) {
      ThrowData("items line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const Error& e) {
      ThrowData("items line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      ThrowData("items line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(item.question_id).second) {
      ThrowData("items line " + std::to_string(line_no) + ": duplicate question_id '" +
                item.question_id + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<Item> LoadItems(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot open items file " + path.string());
  return ParseItems(in);
}

std::string SerializeItem(const Item& item) {
  ordered_json opts = ordered_json::object();
  for (Label label : kAllLabels) opts[LabelString(label)] = item.options[LabelIndex(label)];
  ordered_json rec = {
      {"question_id", item.question_id},
      {"video_id", item.video_id},
      {"question", item.question},
      {"options", opts},
      {"answer", LabelString(item.answer)},
      {"category_code", std::string(CategoryCode(item.category))},
  };
  return rec.dump();
}

std::string SerializeItems(const std::vector<Item>& items) {
  std::string out;
  for (const auto& item : items) {
    out += SerializeItem(item);
    out += '\n';
  }
  return out;
}

FrozenItemList FreezeStratified(const std::vector<Item>& items,
                                std::size_t per_group, std::uint64_t seed) {
  FrozenItemList list;
  list.per_group_count = per_group;
  list.seed = seed;
  for (Group g : kAllGroups) {
    std::vector<std::string> pool;
    for (const auto& item : items) {
      if (item.group() == g) pool.push_back(item.question_id);
    }
    if (pool.size() < per_group) {
      ThrowData("group " + std::string(GroupName(g)) + " has " + std::to_string(pool.size()) +
                " items, need " + std::to_string(per_group));
    }
    Rng rng(HashMix(seed, GroupName(g)));
    rng.Shuffle(pool);
    list.ids.insert(list.ids.end(), pool.begin(),
                    pool.begin() + static_cast<std::ptrdiff_t>(per_group));
  }
  return list;
}

std::string SerializeFrozenList(const FrozenItemList& list) {
  ordered_json doc = {
      {"ids", list.ids},
      {"per_group_count", list.per_group_count},
      {"seed", list.seed},
  };
  return doc.dump(2) + "\n";
}

FrozenItemList ParseFrozenList(std::string_view text) {
  FrozenItemList list;
  try {
    auto doc = ordered_json::parse(text);
    list.ids = doc.at("ids").get<std::vector<std::string>>();
    list.per_group_count = doc.at("per_group_count").get<std::size_t>();
    list.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const ordered_json::exception& e) {
    ThrowData(std::string("malformed item id list: ") + e.what());
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : list.ids) {
    if (!seen.insert(id).second) ThrowData("item id list repeats '" + id + "'");
  }
  return list;
}

FrozenItemList LoadFrozenList(const std::filesystem::path& path) {
  return ParseFrozenList(ReadFile(path));
}

std::vector<Item> SelectItems(const std::vector<Item>& items,
                              const std::vector<std::string>& ids) {
  AnswerKey key(items);
  std::vector<Item> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(key.At(id));
  return out;
}

AnswerKey::AnswerKey(const std::vector<Item>& items) : items_(items) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].question_id, i).second) {
      ThrowData("duplicate question_id '" + items_[i].question_id + "'");
    }
  }
}

const Item* AnswerKey::Find(std::string_view question_id) const {
  auto it = index_.find(std::string(question_id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Item& AnswerKey::At(std::string_view question_id) const {
  const Item* item = Find(question_id);
  if (!item) ThrowData("unknown question_id '" + std::string(question_id) + "'");
  return *item;
}

}  // namespace selgate::corpus
