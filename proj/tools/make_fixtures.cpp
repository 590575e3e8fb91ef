// Writes the bundled fixture files into a directory.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "liel/fixtures.hpp"

namespace {

template <class T, class F>
void write_lines(const std::filesystem::path& path, const std::vector<T>& items, F&& to_json) {
  std::ofstream out(path);
  for (const auto& item : items) out << to_json(item).dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  using namespace liel;

  const auto corpus = fixtures::synthetic_corpus(0);
  write_lines(dir / "toy_kb.jsonl", corpus.kb, kb_record_to_json);
  write_lines(dir / "toy_train.jsonl", corpus.train, document_to_json);
  write_lines(dir / "toy_test.jsonl", corpus.test, document_to_json);

  write_lines(dir / "home_depot_kb.jsonl", fixtures::home_depot_kb(true), kb_record_to_json);
  MentionDocument d = fixtures::home_depot_document();
  d.mentions[0].gold = "HOME_DEPOT";
  d.mentions[1].gold = "ROBERT_NARDELLI";
  write_lines(dir / "home_depot_docs.jsonl", std::vector<MentionDocument>{d}, document_to_json);

  std::ofstream stop(dir / "stopwords.txt");
  for (auto w : {"the", "a", "an", "and", "of", "is", "for", "in", "with"}) stop << w << '\n';
  return 0;
}
