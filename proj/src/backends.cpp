#include "llmgp/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#ifdef LLMGP_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "llmgp/prompts.hpp"

namespace llmgp {

using nlohmann::json;

namespace {

// Latency model: fixed service overhead plus a per-token term, with a
// +/-10% deterministic wobble. Completion tokens dominate, mirroring how
// chat endpoints behave.
double synthetic_latency(long prompt_tokens, long completion_tokens, Rng& rng) {
  double base = 0.2 + 0.002 * static_cast<double>(prompt_tokens) +
                0.01 * static_cast<double>(completion_tokens);
  return base * rand_range(rng, 0.9, 1.1);
}

BackendResponse make_response(const std::string& prompt, std::string content, Rng& rng) {
  BackendResponse resp;
  resp.prompt_tokens = estimate_tokens(prompt);
  resp.completion_tokens = estimate_tokens(content);
  resp.content = std::move(content);
  resp.response_time = synthetic_latency(resp.prompt_tokens, resp.completion_tokens, rng);
  return resp;
}

std::optional<std::string> extract(const std::string& text, const std::string& before,
                                   const std::string& after) {
  size_t start = text.find(before);
  if (start == std::string::npos) return std::nullopt;
  start += before.size();
  size_t end = text.find(after, start);
  if (end == std::string::npos) return std::nullopt;
  return text.substr(start, end - start);
}

std::optional<std::vector<double>> parse_number_list(const std::string& text) {
  std::vector<double> out;
  size_t i = text.find('[');
  if (i == std::string::npos) return std::nullopt;
  size_t end = text.find(']', i);
  if (end == std::string::npos) return std::nullopt;
  std::string inner = text.substr(i + 1, end - i - 1);
  size_t pos = 0;
  while (pos < inner.size()) {
    while (pos < inner.size() && (inner[pos] == ' ' || inner[pos] == ',')) ++pos;
    if (pos >= inner.size()) break;
    char* endp = nullptr;
    double v = std::strtod(inner.c_str() + pos, &endp);
    if (endp == inner.c_str() + pos) return std::nullopt;
    out.push_back(v);
    pos = endp - inner.c_str();
  }
  return out;
}

}  // namespace

ScriptedBackend::ScriptedBackend(const std::vector<PromptRecord>& replay) {
  for (const auto& r : replay) {
    Entry e;
    e.content = r.content;
    e.recorded = true;
    e.prompt_tokens = r.n_prompt_tokens;
    e.completion_tokens = r.n_completion_tokens;
    e.response_time = r.response_time;
    by_prompt_[r.prompt].push_back(std::move(e));
  }
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  return ScriptedBackend(replay_log(path));
}

void ScriptedBackend::enqueue(std::string content) {
  queue_.push_back(Entry{std::move(content), false, 0, 0, 0.0});
}

void ScriptedBackend::enqueue_for(std::string prompt, std::string content) {
  by_prompt_[std::move(prompt)].push_back(Entry{std::move(content), false, 0, 0, 0.0});
}

BackendResponse ScriptedBackend::complete(const BackendRequest& req) {
  Entry entry;
  auto it = by_prompt_.find(req.prompt);
  if (it != by_prompt_.end() && !it->second.empty()) {
    entry = std::move(it->second.front());
    it->second.pop_front();
  } else if (!queue_.empty()) {
    entry = std::move(queue_.front());
    queue_.pop_front();
  }
  if (entry.recorded) {
    BackendResponse resp;
    resp.content = std::move(entry.content);
    resp.prompt_tokens = entry.prompt_tokens;
    resp.completion_tokens = entry.completion_tokens;
    resp.response_time = entry.response_time;
    return resp;
  }
  Rng rng(derive_seed(0x5c71, req.call_index));
  return make_response(req.prompt, std::move(entry.content), rng);
}

GenerativeBackend::GenerativeBackend(std::uint64_t seed, PrimitiveSet prims, int max_depth)
    : seed_(seed), prims_(std::move(prims)), max_depth_(max_depth) {}

BackendResponse GenerativeBackend::complete(const BackendRequest& req) {
  namespace pm = prompt_markers;
  const std::string& prompt = req.prompt;
  Rng rng(derive_seed(derive_seed(seed_, req.call_index), fnv1a(prompt)));

  auto reply = [&](const json& j) { return make_response(prompt, j.dump(), rng); };

  auto individuals_after = [&](const char* marker)
      -> std::optional<std::vector<std::pair<std::string, double>>> {
    auto block = extract(prompt, marker, pm::kResponseFormat);
    if (!block) return std::nullopt;
    std::vector<std::pair<std::string, double>> inds;
    size_t pos = 0;
    while (pos <= block->size()) {
      size_t nl = block->find('\n', pos);
      std::string line = block->substr(pos, nl == std::string::npos ? nl : nl - pos);
      if (!line.empty()) {
        size_t sep = line.rfind(" : ");
        if (sep == std::string::npos) return std::nullopt;
        inds.emplace_back(line.substr(0, sep), std::strtod(line.c_str() + sep + 3, nullptr));
      }
      if (nl == std::string::npos) break;
      pos = nl + 1;
    }
    return inds;
  };

  auto ranked = [](std::vector<std::pair<std::string, double>> inds) {
    std::stable_sort(inds.begin(), inds.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    return inds;
  };

  if (prompt.rfind(pm::kInit, 0) == 0) {
    int d = 1 + static_cast<int>(rand_below(rng, std::min(3, std::max(1, max_depth_))));
    Expr t = random_tree(GrowMethod::grow, d, prims_, rng);
    return reply(json{{"expression", to_text(t)}});
  }

  if (auto expr_text = extract(prompt, pm::kMutation, pm::kMutationTail)) {
    auto parent = try_parse(*expr_text, prims_);
    std::string child = parent ? to_text(subtree_mutation(*parent, max_depth_, prims_, rng))
                               : *expr_text;
    return reply(json{{"new_expression", child}});
  }

  if (auto parents_text = extract(prompt, pm::kCrossover, pm::kCrossoverTail)) {
    auto parents = parse_python_list(*parents_text);
    auto count_text = extract(prompt, pm::kCrossoverTail, " new expressions");
    int n_children = count_text ? std::atoi(count_text->c_str()) : 2;
    if (parents && parents->size() == 2) {
      auto pa = try_parse((*parents)[0], prims_);
      auto pb = try_parse((*parents)[1], prims_);
      if (pa && pb) {
        auto [c1, c2] = subtree_crossover(*pa, *pb, max_depth_, rng);
        std::vector<std::string> kids{to_text(c1), to_text(c2)};
        while (static_cast<int>(kids.size()) < n_children)
          kids.push_back(kids[kids.size() % 2]);
        kids.resize(std::max(n_children, 0));
        return reply(json{{"expressions", kids}});
      }
    }
    return reply(json{{"expressions", parents ? *parents : std::vector<std::string>{}}});
  }

  if (auto count_text = extract(prompt, pm::kSelect, pm::kSelectTail)) {
    if (auto inds = individuals_after(pm::kSelectTail)) {
      int k = std::atoi(count_text->c_str());
      auto by_rank = ranked(*inds);
      std::vector<std::string> chosen;
      for (int i = 0; i < k && !by_rank.empty(); ++i)
        chosen.push_back(by_rank[i % by_rank.size()].first);
      return reply(json{{"individuals", chosen}});
    }
  }

  if (prompt.find(pm::kSort) != std::string::npos) {
    if (auto inds = individuals_after(pm::kSort)) {
      std::vector<std::string> order;
      for (const auto& [genotype, fitness] : ranked(*inds)) order.push_back(genotype);
      return reply(json{{"individuals", order}});
    }
  }

  if (auto expr_text = extract(prompt, pm::kEvaluation, pm::kEvaluationTail)) {
    auto e = try_parse(*expr_text, prims_);
    auto tail = extract(prompt, pm::kEvaluationTail, pm::kResponseFormat);
    std::vector<std::string> outputs;
    if (e && tail) {
      size_t pos = 0;
      while ((pos = tail->find("'x0': ", pos)) != std::string::npos) {
        Point p;
        p.x0 = std::strtod(tail->c_str() + pos + 6, nullptr);
        size_t x1pos = tail->find("'x1': ", pos);
        if (x1pos == std::string::npos) break;
        p.x1 = std::strtod(tail->c_str() + x1pos + 6, nullptr);
        outputs.push_back(format_number(evaluate(*e, p)));
        pos = x1pos + 6;
      }
    }
    return reply(json{{"outputs", outputs}});
  }

  if (size_t at = prompt.find(pm::kFitness); at != std::string::npos) {
    std::string rest = prompt.substr(at + std::string(pm::kFitness).size());
    const std::string cmp = " When comparing it to the following list of targets: ";
    size_t cmp_at = rest.find(cmp);
    if (cmp_at != std::string::npos) {
      auto outputs = parse_number_list(rest.substr(0, cmp_at));
      auto targets = parse_number_list(rest.substr(cmp_at + cmp.size()));
      if (outputs && targets && !targets->empty() && outputs->size() == targets->size()) {
        double sum = 0.0;
        for (size_t i = 0; i < targets->size(); ++i) {
          double d = (*outputs)[i] - (*targets)[i];
          sum += d * d;
        }
        return reply(json{{"fitness", format_number(sum / targets->size())}});
      }
    }
    return reply(json{{"fitness", format_number(kWorstFitness)}});
  }

  return reply(json{{"note", "unrecognized prompt"}});
}

FaultyBackend::FaultyBackend(std::unique_ptr<Backend> inner, std::uint64_t seed)
    : inner_(std::move(inner)), seed_(seed) {}

void FaultyBackend::set_default_rates(const FaultRates& rates) { default_rates_ = rates; }

void FaultyBackend::set_rates(const std::string& operator_tag, const FaultRates& rates) {
  per_operator_[operator_tag] = rates;
}

const FaultRates& FaultyBackend::rates_for(const std::string& operator_tag) const {
  auto it = per_operator_.find(operator_tag);
  return it == per_operator_.end() ? default_rates_ : it->second;
}

BackendResponse FaultyBackend::complete(const BackendRequest& req) {
  const FaultRates& rates = rates_for(req.operator_tag);
  Rng rng(derive_seed(seed_, req.call_index));
  double u = rand_unit(rng);

  if (u < rates.service_error) {
    BackendResponse resp;
    resp.transient_error = true;
    return resp;
  }
  u -= rates.service_error;
  if (u < rates.malformed_json) {
    return make_response(req.prompt, "not json {", rng);
  }
  u -= rates.malformed_json;
  if (u < rates.missing_key) {
    return make_response(req.prompt, json{{"unexpected", "payload"}}.dump(), rng);
  }
  u -= rates.missing_key;

  BackendResponse resp = inner_->complete(req);
  if (u < rates.truncated && !resp.transient_error) {
    resp.content = resp.content.substr(0, resp.content.size() / 2);
    resp.completion_tokens = estimate_tokens(resp.content);
  }
  return resp;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("LLMGP_API_KEY")) config_.api_key = key;
  }
}

BackendResponse HttpBackend::complete(const BackendRequest& req) {
  BackendResponse out;
  out.transient_error = true;

  std::string base = config_.endpoint;
  std::string path = "/";
  size_t scheme = base.find("://");
  size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    path = base.substr(slash);
    base = base.substr(0, slash);
  }

  json body{{"model", req.model_id},
            {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};

  httplib::Client cli(base);
  cli.set_connection_timeout(config_.timeout_s);
  cli.set_read_timeout(config_.timeout_s);
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(path, headers, body.dump(), "application/json");
  out.response_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!res) return out;
  if (res->status != 200) return out;

  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) return out;
  try {
    out.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      out.completion_tokens = j["usage"].value("completion_tokens", 0L);
    } else {
      out.prompt_tokens = estimate_tokens(req.prompt);
      out.completion_tokens = estimate_tokens(out.content);
    }
  } catch (const json::exception&) {
    return out;
  }
  out.transient_error = false;
  return out;
}

}  // namespace llmgp
