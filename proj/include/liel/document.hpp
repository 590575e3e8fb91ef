#pragma once

// Input documents with pre-detected mention spans.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "liel/error.hpp"

namespace liel {

struct Mention {
  std::string id;
  std::string surface;
  std::size_t start = 0;  // byte offsets into the document text
  std::size_t end = 0;
  std::optional<std::string> gold;          // KB id or "NIL"
  std::optional<std::string> gold_cluster;  // gold NIL cluster, if annotated
};

struct MentionDocument {
  std::string doc_id;
  std::string text;
  std::vector<Mention> mentions;  // sorted by start offset
};

// Fills surfaces from the text, validates offsets and sorts by start.
inline void finalize_document(MentionDocument& d) {
  for (auto& m : d.mentions) {
    if (m.start > m.end || m.end > d.text.size()) {
      throw InputError("document '" + d.doc_id + "': mention '" + m.id +
                       "' has offsets outside the text");
    }
    std::string slice = d.text.substr(m.start, m.end - m.start);
    if (!m.surface.empty() && m.surface != slice) {
      throw InputError("document '" + d.doc_id + "': mention '" + m.id +
                       "' surface does not match its text span");
    }
    m.surface = std::move(slice);
  }
  std::stable_sort(d.mentions.begin(), d.mentions.end(),
                   [](const Mention& a, const Mention& b) {
                     if (a.start != b.start) return a.start < b.start;
                     return a.end < b.end;
                   });
}

inline MentionDocument parse_document(const nlohmann::json& j) {
  MentionDocument d;
  try {
    d.doc_id = j.at("doc_id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    for (const auto& jm : j.value("mentions", nlohmann::json::array())) {
      Mention m;
      m.id = jm.at("id").is_string() ? jm.at("id").get<std::string>()
                                     : jm.at("id").dump();
      m.start = jm.at("start").get<std::size_t>();
      m.end = jm.at("end").get<std::size_t>();
      m.surface = jm.value("surface", std::string());
      if (jm.contains("gold") && !jm.at("gold").is_null()) {
        m.gold = jm.at("gold").get<std::string>();
      }
      if (jm.contains("gold_cluster") && !jm.at("gold_cluster").is_null()) {
        m.gold_cluster = jm.at("gold_cluster").get<std::string>();
      }
      d.mentions.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("malformed document record: ") + ex.what());
  }
  finalize_document(d);
  return d;
}

inline nlohmann::json document_to_json(const MentionDocument& d) {
  nlohmann::json mentions = nlohmann::json::array();
  for (const auto& m : d.mentions) {
    nlohmann::json jm = {{"id", m.id}, {"start", m.start}, {"end", m.end}};
    if (m.gold) jm["gold"] = *m.gold;
    if (m.gold_cluster) jm["gold_cluster"] = *m.gold_cluster;
    mentions.push_back(std::move(jm));
  }
  return {{"doc_id", d.doc_id}, {"text", d.text}, {"mentions", mentions}};
}

inline std::vector<MentionDocument> read_documents(std::istream& in) {
  std::vector<MentionDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(parse_document(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("document line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const InputError& ex) {
      throw InputError("document line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return docs;
}

inline std::vector<MentionDocument> read_documents_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read document file " + path);
  return read_documents(in);
}

}  // namespace liel
