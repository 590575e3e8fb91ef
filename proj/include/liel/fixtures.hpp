#pragma once

// Bundled fixtures: the Home Depot KB, a synthetic ten-entity corpus, and a
// letter substitution used for script-independence checks.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "liel/document.hpp"
#include "liel/features.hpp"
#include "liel/kb_store.hpp"
#include "liel/maxent.hpp"
#include "liel/unicode.hpp"

namespace liel::fixtures {

// ---------------------------------------------------------------------------
// Home Depot

/// Six entries. "Nardelli" links to STEVE_NARDELLI three times and to
/// ROBERT_NARDELLI once. With `cooccurrence`, the Home Depot page also links
/// to Robert Nardelli.
inline std::vector<KbEntry> home_depot_kb(bool cooccurrence) {
  std::vector<KbEntry> kb;
  kb.push_back({"CHRYSLER",
                "Chrysler",
                "Chrysler is an American automaker based in Auburn Hills. "
                "Nardelli became its chief executive after leaving retail.",
                {"Automotive companies"},
                {{"Nardelli", "ROBERT_NARDELLI"}},
                {}});
  kb.push_back({"HOME_DEPOT",
                "The Home Depot",
                "The Home Depot is the largest home improvement retailer in the "
                "United States, selling tools, lumber and garden supplies.",
                {"Home improvement retailers", "Companies based in Atlanta"},
                {},
                {"Home Depot"}});
  if (cooccurrence) kb.back().outlinks.push_back({"Robert Nardelli", "ROBERT_NARDELLI"});
  kb.push_back({"LOWES",
                "Lowe's",
                "Lowe's is a home improvement chain that competes with Home Depot.",
                {"Home improvement retailers"},
                {{"Home Depot", "HOME_DEPOT"}},
                {}});
  kb.push_back({"ROBERT_NARDELLI",
                "Robert Nardelli",
                "Robert Nardelli is an American business executive who ran a large "
                "retailer and later an automaker.",
                {"American chief executives"},
                {},
                {"Bob Nardelli"}});
  kb.push_back({"STEVE_NARDELLI",
                "Steve Nardelli",
                "Steve Nardelli is a football club chairman from Lancashire.",
                {"Football chairmen"},
                {},
                {}});
  kb.push_back({"WIGAN_ATHLETIC",
                "Wigan Athletic",
                "Wigan Athletic is a football club. Its chairman Nardelli, "
                "chairman Nardelli again, and Nardelli once more.",
                {"Football clubs"},
                {{"Nardelli", "STEVE_NARDELLI"},
                 {"Nardelli", "STEVE_NARDELLI"},
                 {"Nardelli", "STEVE_NARDELLI"}},
                {}});
  return kb;
}

inline MentionDocument home_depot_document() {
  MentionDocument d{"home-depot", "Home Depot CEO Nardelli quits", {}};
  d.mentions.push_back({"m1", "", 0, 10, std::nullopt, std::nullopt});
  d.mentions.push_back({"m2", "", 15, 23, std::nullopt, std::nullopt});
  finalize_document(d);
  return d;
}

/// Hand-set weights: link prior and title co-occurrence count +1, NIL -1,
/// everything else 0.
inline Model home_depot_model() {
  Model m;
  m.weights.assign(feature::kCount, 0.0);
  m.weights[feature::kLinkPrior] = 1.0;
  m.weights[feature::kTitleCooccurrence] = 1.0;
  m.weights[feature::kNilFrequency] = -1.0;
  return m;
}

inline Model zero_model() {
  Model m;
  m.weights.assign(feature::kCount, 0.0);
  return m;
}

// ---------------------------------------------------------------------------
// Synthetic corpus: five ambiguous names, two entities each.

struct SyntheticEntity {
  std::string_view id;
  std::string_view title;
  std::string_view name;  // shared ambiguous surface form
  std::string_view category;
  std::array<std::string_view, 12> vocabulary;
};

inline constexpr std::array<SyntheticEntity, 10> kSyntheticEntities = {{
    {"MICHAEL_JORDAN", "Michael Jordan", "Jordan", "Basketball players",
     {"basketball", "bulls", "chicago", "nba", "dunk", "championship", "guard", "playoffs",
      "court", "scoring", "coach", "season"}},
    {"JORDAN_COUNTRY", "Jordan (country)", "Jordan", "Countries in Asia",
     {"amman", "kingdom", "desert", "petra", "arab", "border", "river", "monarchy",
      "hashemite", "valley", "embassy", "refugees"}},
    {"MERCURY_PLANET", "Mercury (planet)", "Mercury", "Planets",
     {"orbit", "sun", "planet", "crater", "solar", "nasa", "probe", "surface", "gravity",
      "telescope", "perihelion", "astronomy"}},
    {"FREDDIE_MERCURY", "Freddie Mercury", "Mercury", "Rock singers",
     {"queen", "singer", "rock", "band", "album", "concert", "vocals", "song", "wembley",
      "piano", "tour", "opera"}},
    {"PARIS_FRANCE", "Paris", "Paris", "Capitals in Europe",
     {"france", "seine", "louvre", "eiffel", "capital", "french", "museum",
      "arrondissement", "metro", "cathedral", "boulevard", "mayor"}},
    {"PARIS_HILTON", "Paris Hilton", "Paris", "Socialites",
     {"hotel", "heiress", "celebrity", "reality", "television", "fashion", "socialite",
      "perfume", "show", "fame", "tabloid", "party"}},
    {"APPLE_INC", "Apple Inc.", "Apple", "Technology companies",
     {"iphone", "computer", "software", "cupertino", "mac", "company", "ipad", "shares",
      "devices", "stock", "chips", "laptop"}},
    {"APPLE_FRUIT", "Apple (fruit)", "Apple", "Fruits",
     {"fruit", "orchard", "tree", "cider", "harvest", "juice", "pie", "variety", "blossom",
      "pectin", "ripe", "grafting"}},
    {"PYTHON_LANGUAGE", "Python (programming language)", "Python", "Programming languages",
     {"programming", "language", "interpreter", "code", "syntax", "library", "guido",
      "script", "developers", "module", "indentation", "bytecode"}},
    {"PYTHON_SNAKE", "Python (genus)", "Python", "Snakes",
     {"snake", "constrictor", "reptile", "scales", "prey", "jungle", "nonvenomous", "eggs",
      "species", "africa", "swallow", "coils"}},
}};

inline constexpr std::array<std::string_view, 16> kFillerWords = {
    "the",   "said",  "report", "today", "people", "new",    "year",   "week",
    "local", "other", "news",   "about", "after",  "during", "before", "several"};

inline constexpr std::array<std::string_view, 3> kNilNames = {"Veltrano", "Quibbick",
                                                              "Ostrander"};

struct SyntheticCorpus {
  std::vector<KbEntry> kb;
  std::vector<MentionDocument> train;
  std::vector<MentionDocument> test;
};

/// Ten entities, 50 documents (40 train, 10 test). Each document is about
/// one entity; 60% of its context words come from that entity's page
/// vocabulary. Every fifth document also carries an unknown name (gold NIL)
/// next to the ambiguous mention.
inline SyntheticCorpus synthetic_corpus(std::uint64_t seed = 0) {
  SyntheticCorpus c;
  for (std::size_t i = 0; i < kSyntheticEntities.size(); ++i) {
    const auto& s = kSyntheticEntities[i];
    KbEntry e;
    e.id = s.id;
    e.title = s.title;
    e.categories.insert(std::string(s.category));
    std::string text = std::string(s.title) + " is known for";
    for (auto w : s.vocabulary) text += " " + std::string(w);
    text += ". " + std::string(s.name) + " and";
    for (std::size_t k = 0; k < s.vocabulary.size(); k += 2) {
      text += " " + std::string(s.vocabulary[k]);
    }
    text += ".";
    e.text = std::move(text);
    c.kb.push_back(std::move(e));
  }
  // Anchors live on other pages: entity i is linked from pages i+2, i+4, ...
  // The first entity of each pair dominates the shared anchor 3:2.
  for (std::size_t i = 0; i < kSyntheticEntities.size(); ++i) {
    const auto& s = kSyntheticEntities[i];
    const std::size_t shared = i % 2 == 0 ? 3 : 2;
    for (std::size_t k = 0; k < shared; ++k) {
      auto& src = c.kb[(i + 2 + 2 * k) % c.kb.size()];
      src.outlinks.push_back({std::string(s.name), std::string(s.id)});
    }
    c.kb[(i + 3) % c.kb.size()].outlinks.push_back({std::string(s.title), std::string(s.id)});
  }

  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  for (std::size_t doc = 0; doc < 50; ++doc) {
    const std::size_t pair = doc % 5;
    const std::size_t member = (doc / 5) % 2;
    const auto& s = kSyntheticEntities[2 * pair + member];

    std::vector<std::string> words;
    for (std::size_t k = 0; k < 12; ++k) words.emplace_back(s.vocabulary[pick(12)]);
    for (std::size_t k = 0; k < 8; ++k) words.emplace_back(kFillerWords[pick(kFillerWords.size())]);
    for (std::size_t k = words.size(); k > 1; --k) std::swap(words[k - 1], words[pick(k)]);

    MentionDocument d;
    d.doc_id = "doc" + std::to_string(doc);
    const std::size_t at = 10;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (k == at) {
        if (!d.text.empty()) d.text += ' ';
        const std::size_t start = d.text.size();
        d.text += s.name;
        d.mentions.push_back({"m1", "", start, d.text.size(), std::string(s.id), std::nullopt});
        if (doc % 5 == 4) {
          const std::string_view nil = kNilNames[(doc / 5) % kNilNames.size()];
          d.text += " met ";
          const std::size_t nil_start = d.text.size();
          d.text += nil;
          d.mentions.push_back({"m2", "", nil_start, d.text.size(), std::string(kNilId),
                                std::string(nil)});
        }
      }
      if (!d.text.empty()) d.text += ' ';
      d.text += words[k];
    }
    d.text += '.';
    finalize_document(d);
    (doc < 40 ? c.train : c.test).push_back(std::move(d));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Letter substitution

/// Maps a-z to U+0430.. and A-Z to U+0410.., leaving every other code point
/// alone. The map is a bijection onto its image, keeps byte order between
/// mapped letters, and commutes with case folding.
inline std::string substitute_letters(std::string_view s) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char ch : s) {
    if (ch >= 'a' && ch <= 'z') {
      unicode::append_code_point(out, 0x0430 + (ch - 'a'));
    } else if (ch >= 'A' && ch <= 'Z') {
      unicode::append_code_point(out, 0x0410 + (ch - 'A'));
    } else {
      out += ch;
    }
  }
  return out;
}

/// Applies substitute_letters to every string of an entry except its id and
/// link targets (identifiers, not text).
inline KbEntry substitute_letters(const KbEntry& e) {
  KbEntry out;
  out.id = e.id;
  out.title = substitute_letters(e.title);
  out.text = substitute_letters(e.text);
  for (const auto& c : e.categories) out.categories.insert(substitute_letters(c));
  for (const auto& l : e.outlinks) out.outlinks.push_back({substitute_letters(l.anchor), l.target});
  for (const auto& r : e.redirects) out.redirects.insert(substitute_letters(r));
  return out;
}

/// Substitutes the text and surfaces and moves mention offsets to match.
inline MentionDocument substitute_letters(const MentionDocument& d) {
  MentionDocument out;
  out.doc_id = d.doc_id;
  out.text = substitute_letters(d.text);
  for (const auto& m : d.mentions) {
    Mention n = m;
    n.start = substitute_letters(std::string_view(d.text).substr(0, m.start)).size();
    n.end = substitute_letters(std::string_view(d.text).substr(0, m.end)).size();
    n.surface = substitute_letters(m.surface);
    out.mentions.push_back(std::move(n));
  }
  finalize_document(out);
  return out;
}

}  // namespace liel::fixtures
