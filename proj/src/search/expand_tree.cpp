// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "search/expand_tree.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include "client/prompt.hpp"
#include "client/routed_experts.hpp"
#include "common/error.hpp"
#include "search/decision_points.hpp"

namespace moeroute::search {

namespace {

struct Job {
  std::string node_id;
  std::optional<std::string> parent_id;
  std::optional<int> branch_step;
  std::optional<trace::TokenId> forced_token;
  std::string forced_text;
  std::string prefix;
  int depth = 0;
  std::optional<std::int64_t> expected_prompt_tokens;
};

struct Done {
  Job job;
  client::GenResponse resp;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

trace::Finish to_finish(Completion c) {
  switch (c) {
    case Completion::completed: return trace::Finish::completed;
    case Completion::truncated: return trace::Finish::truncated;
    case Completion::error: return trace::Finish::error;
  }
  return trace::Finish::error;
}

}  // namespace

trace::GenNode node_from_response(const trace::RunConfig& config, client::GenResponse resp, std::string node_id,
                                  std::optional<std::string> parent_id, std::optional<int> branch_step,
                                  std::optional<trace::TokenId> forced_token, std::string forced_text,
                                  std::string prefix_text, int depth) {
  trace::GenNode node;
  node.node_id = std::move(node_id);
  node.parent_id = std::move(parent_id);
  node.branch_step = branch_step;
  node.forced_token = forced_token;
  node.forced_text = std::move(forced_text);
  node.prefix_text = std::move(prefix_text);
  node.depth = depth;
  node.prompt_tokens = resp.prompt_tokens;
  node.finish = to_finish(classify_completion(resp));
  if (node.finish == trace::Finish::error) {
    node.error = resp.error;
    return node;
  }
  try {
    const std::size_t n = resp.token_ids.size();
    auto decoded = client::decode_routed_experts(resp.routed_experts_b64, n + resp.stop_trimmed, config.n_layers,
                                                 config.routed_experts_per_layer, config.n_routed_experts);
    std::vector<trace::ExpertId> ids(decoded.data().begin(),
                                     decoded.data().begin() + static_cast<std::ptrdiff_t>(
                                                                  n * config.n_layers * config.routed_experts_per_layer));
    node.trace = trace::RoutingTrace(n, config.n_layers, config.routed_experts_per_layer, std::move(ids));
    node.trace.check(config.n_layers, config.routed_experts_per_layer, config.n_routed_experts);
  } catch (const Error& e) {
    node.finish = trace::Finish::error;
    node.error = e.what();
    return node;
  }
  node.gen_token_ids = std::move(resp.token_ids);
  node.gen_token_texts = std::move(resp.token_texts);
  node.top_logprobs = std::move(resp.top_logprobs);
  for (auto& row : node.top_logprobs) {
    if (row.size() > static_cast<std::size_t>(config.top_logprobs_num)) row.resize(config.top_logprobs_num);
  }
  return node;
}

ExpandResult expand_tree(const trace::RunConfig& config, const GeneratorFactory& make_generator,
                         trace::RunStore& store, const ProgressFn& progress) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const auto deadline = started + config.timeout;

  ExpandResult result;
  result.manifest.started_at = utc_now();

  std::mutex mu;
  std::condition_variable work_cv;
  std::condition_variable done_cv;
  std::deque<Job> pending;
  std::deque<Done> finished;
  int in_flight = 0;
  int max_in_flight = 0;
  bool stopping = false;
  bool shutdown = false;

  client::GenRequest base;
  base.sampling = {config.temperature, config.top_p, config.top_k, config.max_gen_len};
  base.top_logprobs_num = config.top_logprobs_num;
  base.return_routed_experts = true;
  base.stop = {config.stop_token};

  auto worker = [&](std::unique_ptr<client::Generator> gen) {
    while (true) {
      Job job;
      {
        std::unique_lock lock(mu);
        work_cv.wait(lock, [&] { return shutdown || (!stopping && !pending.empty()); });
        if (shutdown) return;
        job = std::move(pending.front());
        pending.pop_front();
        ++in_flight;
        max_in_flight = std::max(max_in_flight, in_flight);
      }
      client::GenRequest req = base;
      req.prefix_text = job.prefix;
      client::GenResponse resp;
      try {
        resp = gen->generate(req);
      } catch (const std::exception& e) {
        resp = client::GenResponse{};
        resp.error = e.what();
      }
      {
        std::lock_guard lock(mu);
        --in_flight;
        finished.push_back({std::move(job), std::move(resp)});
      }
      done_cv.notify_one();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(config.max_concurrent));
  for (int i = 0; i < config.max_concurrent; ++i) workers.emplace_back(worker, make_generator());

  std::set<std::string> scheduled;
  Job root;
  root.node_id = trace::make_node_id(std::nullopt, std::nullopt, std::nullopt);
  root.prefix = client::build_prefix(config.system_text, config.user_text, config.thinking_skip, "");
  scheduled.insert(root.node_id);
  {
    std::lock_guard lock(mu);
    pending.push_back(std::move(root));
  }
  work_cv.notify_one();

  bool root_seen = false;
  std::string root_error;
  while (true) {
    std::deque<Done> batch;
    {
      std::unique_lock lock(mu);
      done_cv.wait_until(lock, deadline, [&] {
        return !finished.empty() || (pending.empty() && in_flight == 0);
      });
      if (!stopping && Clock::now() >= deadline) {
        stopping = true;
        result.manifest.timed_out = !pending.empty() || in_flight > 0 || !finished.empty();
        pending.clear();
      }
      batch.swap(finished);
      if (batch.empty() && pending.empty() && in_flight == 0) break;
      if (batch.empty() && stopping) {
        done_cv.wait(lock, [&] { return !finished.empty() || in_flight == 0; });
        batch.swap(finished);
        if (batch.empty()) break;
      }
    }

    for (auto& done : batch) {
      Job& job = done.job;
      const bool is_root = !job.parent_id;
      trace::GenNode node =
          node_from_response(config, std::move(done.resp), job.node_id, job.parent_id, job.branch_step,
                             job.forced_token, job.forced_text, job.prefix, job.depth);
      if (job.expected_prompt_tokens && node.prompt_tokens && *node.prompt_tokens != *job.expected_prompt_tokens) {
        node.retokenized = true;
      }
      if (is_root) {
        root_seen = true;
        if (node.finish == trace::Finish::error) root_error = node.error;
      }

      std::vector<trace::DecisionPoint> dps;
      if (node.finish == trace::Finish::completed) {
        try {
          dps = detect_decision_points(node, config.p_target, config.k_max_forks);
        } catch (const Error& e) {
          node.finish = trace::Finish::error;
          node.error = e.what();
        }
      }
      store.store_node(node);
      result.decision_points += dps.size();
      if (progress) {
        progress("node " + node.node_id + " depth=" + std::to_string(node.depth) + " finish=" +
                 trace::to_string(node.finish) + " tokens=" + std::to_string(node.gen_token_ids.size()) +
                 " dps=" + std::to_string(dps.size()));
      }

      std::vector<Job> children;
      for (const auto& dp : dps) {
        std::string context = node.prefix_text;
        for (int s = 0; s < dp.step; ++s) context += node.gen_token_texts[static_cast<std::size_t>(s)];
        const trace::TokenId sampled = node.gen_token_ids[static_cast<std::size_t>(dp.step)];
        for (const auto& cand : dp.candidates) {
          if (!config.fork_includes_sampled && cand.token_id == sampled) continue;
          Job child;
          child.parent_id = node.node_id;
          child.branch_step = dp.step;
          child.forced_token = cand.token_id;
          child.forced_text = cand.text;
          child.node_id = trace::make_node_id(child.parent_id, child.branch_step, child.forced_token);
          if (!scheduled.insert(child.node_id).second) continue;
          child.prefix = context + cand.text;
          child.depth = node.depth + 1;
          if (node.prompt_tokens) child.expected_prompt_tokens = *node.prompt_tokens + dp.step + 1;
          children.push_back(std::move(child));
        }
      }
      if (!children.empty()) {
        std::lock_guard lock(mu);
        if (!stopping) {
          result.manifest.forks_scheduled += children.size();
          for (auto& c : children) pending.push_back(std::move(c));
        }
      }
      work_cv.notify_all();
    }
  }

  {
    std::lock_guard lock(mu);
    shutdown = true;
  }
  work_cv.notify_all();
  for (auto& t : workers) t.join();

  result.manifest.max_in_flight = max_in_flight;
  result.manifest.finished_at = utc_now();
  result.manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  store.finalize(result.manifest);
  result.manifest = store.manifest();
  if (!root_seen || !root_error.empty()) {
    fail(ErrorCode::endpoint, "root generation failed: " + (root_error.empty() ? std::string("no response") : root_error));
  }
  return result;
}

}  // namespace moeroute::search
