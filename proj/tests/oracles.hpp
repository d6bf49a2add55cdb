#pragma once

// Brute-force reference implementations used only by the tests. They follow
// the textbook definitions directly and share no code with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// ASCII-only whitespace split; test corpora are ASCII.
inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Occurrences of `term` as an n-gram of `doc` under the given mode.
inline std::size_t occurrences(const std::string& doc, const std::string& term, const std::string& mode,
                               std::size_t lo, std::size_t hi) {
  std::size_t count = 0;
  if (mode == "word") {
    auto w = words(doc);
    auto t = words(term);
    if (t.size() < lo || t.size() > hi || t.empty()) return 0;
    for (std::size_t i = 0; i + t.size() <= w.size(); ++i)
      if (std::equal(t.begin(), t.end(), w.begin() + static_cast<long>(i))) ++count;
    return count;
  }
  if (mode == "char") {
    std::string norm;
    for (const auto& w : words(doc)) norm += (norm.empty() ? "" : " ") + w;
    if (term.size() < lo || term.size() > hi) return 0;
    for (std::size_t i = 0; i + term.size() <= norm.size(); ++i)
      if (norm.compare(i, term.size(), term) == 0) ++count;
    return count;
  }
  // char_wb
  for (const auto& w : words(doc)) {
    std::string padded = " " + w + " ";
    for (std::size_t n = lo; n <= hi; ++n) {
      if (padded.size() < n) {
        // short words contribute themselves once, at the smallest n only
        if (n == lo && term == padded) ++count;
        break;
      }
      if (term.size() != n) continue;
      for (std::size_t i = 0; i + n <= padded.size(); ++i)
        if (padded.compare(i, n, term) == 0) ++count;
    }
  }
  return count;
}

/// Every n-gram string that can occur in `doc`.
inline std::set<std::string> candidate_terms(const std::string& doc, const std::string& mode, std::size_t lo,
                                             std::size_t hi) {
  std::set<std::string> out;
  if (mode == "word") {
    auto w = words(doc);
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::string g;
      for (std::size_t n = 1; n <= hi && i + n <= w.size(); ++n) {
        g += (n > 1 ? " " : "") + w[i + n - 1];
        if (n >= lo) out.insert(g);
      }
    }
  } else if (mode == "char") {
    std::string norm;
    for (const auto& w : words(doc)) norm += (norm.empty() ? "" : " ") + w;
    for (std::size_t i = 0; i < norm.size(); ++i)
      for (std::size_t n = lo; n <= hi && i + n <= norm.size(); ++n) out.insert(norm.substr(i, n));
  } else {
    for (const auto& w : words(doc)) {
      std::string padded = " " + w + " ";
      if (padded.size() < lo) out.insert(padded);
      for (std::size_t i = 0; i < padded.size(); ++i)
        for (std::size_t n = lo; n <= hi && i + n <= padded.size(); ++n) out.insert(padded.substr(i, n));
    }
  }
  return out;
}

}  // namespace oracle
