#pragma once

#include <map>
#include <string>

namespace llmgp {

// Failure classes surfaced by the LLM call pipeline and the response
// formatters. An operator call records at most one of these per attempt.
enum class ErrorClass {
  None,
  JSONDecode,
  MissingKey,
  TypeError,
  MalformedExpression,
  ContextOverflow,
  ServiceError,
  BudgetExceeded,
};

const char* to_string(ErrorClass c);

// Error tallies keyed by operator tag. std::map keeps report output in a
// stable order.
struct ErrorStats {
  std::map<std::string, std::map<ErrorClass, long>> counts;

  void record(const std::string& op, ErrorClass c) {
    if (c == ErrorClass::None) return;
    ++counts[op][c];
  }

  long total(const std::string& op) const {
    auto it = counts.find(op);
    if (it == counts.end()) return 0;
    long n = 0;
    for (const auto& [cls, count] : it->second) n += count;
    return n;
  }

  long total() const {
    long n = 0;
    for (const auto& [op, classes] : counts)
      for (const auto& [cls, count] : classes) n += count;
    return n;
  }

  void merge(const ErrorStats& other) {
    for (const auto& [op, classes] : other.counts)
      for (const auto& [cls, count] : classes) counts[op][cls] += count;
  }
};

}  // namespace llmgp
