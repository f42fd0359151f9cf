#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "webparf/frontier.hpp"
#include "webparf/url.hpp"
#include "webparf/url_db.hpp"

namespace webparf {

// Anchor hrefs of one document, in order of first appearance, duplicates
// preserved. Dedup is the dispatcher's job.
struct LinkSet {
  CanonicalUrl base;
  std::vector<RawHref> hrefs;
};

struct ClassificationResult {
  std::map<std::string, int> scores;  // domain name -> keyword hit count
  std::string winner;
};

namespace detail {

inline char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (lower(a[i]) != lower(b[i])) return false;
  return true;
}

// Case-insensitive search for a closing tag like "</script". Returns the
// position of the '<' or npos.
inline std::size_t find_closing_tag(std::string_view html, std::string_view name,
                                    std::size_t from) {
  for (std::size_t i = from; i + name.size() + 2 <= html.size(); ++i) {
    if (html[i] != '<' || html[i + 1] != '/') continue;
    if (iequals(html.substr(i + 2, name.size()), name)) return i;
  }
  return std::string_view::npos;
}

inline std::size_t skip_comment(std::string_view html, std::size_t pos) {
  auto end = html.find("-->", pos + 4);
  return end == std::string_view::npos ? html.size() : end + 3;
}

// Scans the attribute list of one tag starting just past the tag name.
// Returns the position one past the closing '>' (or end of input) and the
// value of the first attribute named `wanted`, if any.
inline std::size_t scan_attributes(std::string_view html, std::size_t pos,
                                   std::string_view wanted, std::string* value_out,
                                   bool* found_out) {
  while (pos < html.size() && html[pos] != '>') {
    if (std::isspace(static_cast<unsigned char>(html[pos])) || html[pos] == '/') {
      ++pos;
      continue;
    }
    std::size_t name_start = pos;
    while (pos < html.size() && html[pos] != '=' && html[pos] != '>' && html[pos] != '/' &&
           !std::isspace(static_cast<unsigned char>(html[pos])))
      ++pos;
    std::string_view name = html.substr(name_start, pos - name_start);
    while (pos < html.size() && std::isspace(static_cast<unsigned char>(html[pos]))) ++pos;
    std::string value;
    bool has_value = false;
    if (pos < html.size() && html[pos] == '=') {
      ++pos;
      while (pos < html.size() && std::isspace(static_cast<unsigned char>(html[pos]))) ++pos;
      if (pos < html.size() && (html[pos] == '"' || html[pos] == '\'')) {
        char quote = html[pos++];
        std::size_t end = html.find(quote, pos);
        if (end == std::string_view::npos) {
          // unterminated quote swallows the rest of the tag
          end = html.find('>', pos);
          if (end == std::string_view::npos) end = html.size();
        }
        value = std::string(html.substr(pos, end - pos));
        pos = end < html.size() && html[end] == quote ? end + 1 : end;
        has_value = true;
      } else {
        std::size_t end = pos;
        while (end < html.size() && html[end] != '>' &&
               !std::isspace(static_cast<unsigned char>(html[end])))
          ++end;
        value = std::string(html.substr(pos, end - pos));
        has_value = end > pos;  // a bare "name=" carries no value
        pos = end;
      }
    }
    if (has_value && !*found_out && iequals(name, wanted)) {
      *value_out = std::move(value);
      *found_out = true;
    }
  }
  return pos < html.size() ? pos + 1 : pos;
}

}  // namespace detail

// Pulls every href of every <a> element out of arbitrary bytes. Tag and
// attribute names are case-insensitive; quoted, single-quoted and unquoted
// values are accepted; anything malformed is skipped, never fatal.
inline LinkSet extract_links(std::string_view html, const CanonicalUrl& base) {
  LinkSet links{base, {}};
  std::size_t pos = 0;
  while (pos < html.size()) {
    pos = html.find('<', pos);
    if (pos == std::string_view::npos || pos + 1 >= html.size()) break;
    if (html.substr(pos, 4) == "<!--") {
      pos = detail::skip_comment(html, pos);
      continue;
    }
    char next = html[pos + 1];
    if (!std::isalpha(static_cast<unsigned char>(next)) && next != '/') {
      ++pos;
      continue;
    }
    std::size_t name_start = pos + (next == '/' ? 2 : 1);
    std::size_t name_end = name_start;
    while (name_end < html.size() &&
           std::isalnum(static_cast<unsigned char>(html[name_end])))
      ++name_end;
    std::string_view tag = html.substr(name_start, name_end - name_start);
    if (next != '/' && detail::iequals(tag, "a")) {
      std::string href;
      bool found = false;
      pos = detail::scan_attributes(html, name_end, "href", &href, &found);
      if (found) links.hrefs.push_back(RawHref{std::move(href)});
    } else {
      std::size_t close = html.find('>', name_end);
      pos = close == std::string_view::npos ? html.size() : close + 1;
    }
  }
  return links;
}

// Strips tags plus the contents of <script> and <style> elements, then
// tokenizes on non-alphanumeric boundaries, lowercased.
inline std::vector<std::string> extract_text(std::string_view html) {
  std::string text;
  std::size_t pos = 0;
  while (pos < html.size()) {
    if (html[pos] != '<') {
      text.push_back(html[pos++]);
      continue;
    }
    if (html.substr(pos, 4) == "<!--") {
      pos = detail::skip_comment(html, pos);
      continue;
    }
    std::size_t name_start = pos + 1;
    std::size_t name_end = name_start;
    while (name_end < html.size() &&
           std::isalnum(static_cast<unsigned char>(html[name_end])))
      ++name_end;
    std::string_view tag = html.substr(name_start, name_end - name_start);
    std::size_t close = html.find('>', name_end);
    if (close == std::string_view::npos) break;  // unterminated tag swallows the rest
    pos = close + 1;
    if (detail::iequals(tag, "script") || detail::iequals(tag, "style")) {
      std::size_t closing = detail::find_closing_tag(html, tag, pos);
      if (closing == std::string_view::npos) break;
      std::size_t end = html.find('>', closing);
      pos = end == std::string_view::npos ? html.size() : end + 1;
    }
  }

  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(detail::lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Bag-of-words keyword scoring. Winner is the highest-scoring profile,
// ties to the lexicographically smallest name; all-zero means unclassified.
inline ClassificationResult classify(const std::vector<std::string>& tokens,
                                     const std::vector<DomainProfile>& profiles) {
  ClassificationResult result;
  for (const DomainProfile& profile : profiles) result.scores[profile.name] = 0;
  for (const std::string& token : tokens)
    for (const DomainProfile& profile : profiles)
      if (profile.keywords.contains(token)) ++result.scores[profile.name];

  result.winner = kUnclassified;
  int best = 0;
  for (const auto& [name, score] : result.scores) {
    if (score > best) {
      best = score;
      result.winner = name;
    }
  }
  return result;
}

// Records the classifier's verdict in the URL database (see UrlDatabase::tag
// for the precedence rules).
inline void tag_url(UrlDatabase& db, const CanonicalUrl& url, const std::string& domain) {
  db.tag(url, domain, Provenance::classified);
}

}  // namespace webparf
