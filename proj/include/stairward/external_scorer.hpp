#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <boost/process.hpp>
#include "json.hpp"

#include "stairward/core.hpp"
#include "stairward/image_codec.hpp"
#include "stairward/scorer.hpp"

namespace stairward {

inline constexpr int kProtocolVersion = 1;

enum class ImageMode { path, inline_png };

inline std::string_view to_string(ImageMode m) { return m == ImageMode::path ? "path" : "inline"; }

inline ImageMode parse_image_mode(std::string_view s) {
  if (s == "path") return ImageMode::path;
  if (s == "inline") return ImageMode::inline_png;
  config_error("unknown image_mode '" + std::string(s) + "' (expected path or inline)");
}

// Newline-delimited JSON messages exchanged with a scorer child process.
namespace protocol {

inline std::string hello(ImageMode mode) {
  return nlohmann::json{{"op", "hello"}, {"version", kProtocolVersion}, {"image_mode", to_string(mode)}}
      .dump();
}

inline std::string score_by_path(long long id, const std::string& prompt,
                                 const std::filesystem::path& path) {
  return nlohmann::json{{"op", "score"}, {"id", id}, {"prompt", prompt}, {"image_path", path.string()}}
      .dump();
}

inline std::string score_inline(long long id, const std::string& prompt, const std::string& b64) {
  return nlohmann::json{{"op", "score"}, {"id", id}, {"prompt", prompt}, {"image_b64", b64}}.dump();
}

inline std::string bye() { return R"({"op":"bye"})"; }

}  // namespace protocol

struct ExternalScorerConfig {
  std::string name;
  std::string command;  // run through /bin/sh
  std::size_t workers = 1;
  ImageMode image_mode = ImageMode::path;
  std::size_t max_in_flight = 64;
};

namespace detail {

/// One child process. Writes are serialized; a reader thread matches
/// responses to outstanding requests by id, so replies may arrive in any order.
class ScorerProcess {
 public:
  ScorerProcess(const std::string& command, ImageMode mode, std::function<void()> on_done)
      : on_done_(std::move(on_done)) {
    namespace bp = boost::process;
    try {
      child_ = bp::child("/bin/sh", std::vector<std::string>{"-c", "exec " + command},
                         bp::std_out > from_child_, bp::std_in < to_child_);
    } catch (const std::exception& e) {
      backend_error(std::string("scorer backend failure: cannot start '") + command + "': " + e.what());
    }
    try {
      handshake(mode);
    } catch (...) {
      // Otherwise the pipe buffer retries its pending write on destruction and throws.
      to_child_.pipe().close();
      std::error_code ec;
      if (child_.valid()) child_.terminate(ec);
      throw;
    }
    reader_ = std::thread([this] { read_loop(); });
  }

  ScorerProcess(const ScorerProcess&) = delete;
  ScorerProcess& operator=(const ScorerProcess&) = delete;

  ~ScorerProcess() {
    {
      std::lock_guard lock(write_mutex_);
      to_child_ << protocol::bye() << '\n' << std::flush;
      to_child_.pipe().close();
    }
    std::error_code ec;
    if (child_.valid() && !child_.wait_for(std::chrono::seconds(5), ec)) child_.terminate(ec);
    if (reader_.joinable()) reader_.join();
  }

  [[nodiscard]] const std::string& remote_name() const noexcept { return remote_name_; }

  [[nodiscard]] std::size_t outstanding() {
    std::lock_guard lock(state_mutex_);
    return pending_.size();
  }

  std::future<double> submit(long long id, const std::string& line) {
    std::promise<double> promise;
    auto future = promise.get_future();
    {
      std::lock_guard lock(state_mutex_);
      if (dead_) {
        promise.set_exception(std::make_exception_ptr(Error(ErrorKind::backend, death_reason_)));
        on_done_();
        return future;
      }
      pending_.emplace(id, std::move(promise));
    }
    bool ok = false;
    {
      std::lock_guard lock(write_mutex_);
      to_child_ << line << '\n' << std::flush;
      ok = static_cast<bool>(to_child_);
    }
    if (!ok) fail_all("scorer backend failure: cannot write to scorer process");
    return future;
  }

 private:
  void handshake(ImageMode mode) {
    to_child_ << protocol::hello(mode) << '\n' << std::flush;
    std::string line;
    if (!to_child_ || !std::getline(from_child_, line)) {
      backend_error("scorer backend failure: process exited during handshake");
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      backend_error("scorer backend failure: malformed handshake reply: " + line);
    }
    const auto op = reply.value("op", std::string{});
    if (op == "fatal") {
      backend_error("scorer backend failure: " + reply.value("message", std::string{"fatal"}));
    }
    if (op != "hello") backend_error("scorer backend failure: unexpected handshake reply: " + line);
    const auto version = reply.value("version", -1);
    if (version != kProtocolVersion) {
      config_error("scorer protocol version mismatch: expected " + std::to_string(kProtocolVersion) +
                   ", backend speaks " + std::to_string(version));
    }
    remote_name_ = reply.value("name", std::string{});
  }

  void read_loop() {
    std::string line;
    while (std::getline(from_child_, line)) {
      nlohmann::json msg;
      try {
        msg = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        fail_all("scorer backend failure: malformed response: " + line);
        return;
      }
      const auto op = msg.value("op", std::string{});
      if ((op != "result" && op != "error") || !msg.contains("id") || !msg["id"].is_number_integer()) {
        continue;
      }
      const auto id = msg["id"].get<long long>();
      std::promise<double> promise;
      {
        std::lock_guard lock(state_mutex_);
        auto it = pending_.find(id);
        if (it == pending_.end()) continue;
        promise = std::move(it->second);
        pending_.erase(it);
      }
      if (op == "result" && msg.contains("score") && msg["score"].is_number()) {
        promise.set_value(msg["score"].get<double>());
      } else if (op == "result") {
        promise.set_exception(std::make_exception_ptr(
            Error(ErrorKind::backend, "invalid score: backend returned a non-numeric score")));
      } else {
        promise.set_exception(std::make_exception_ptr(Error(
            ErrorKind::backend,
            "scorer backend error: " + msg.value("message", std::string{"unspecified"}))));
      }
      on_done_();
    }
    fail_all("scorer backend failure: scorer process exited");
  }

  void fail_all(const std::string& reason) {
    std::map<long long, std::promise<double>> orphaned;
    {
      std::lock_guard lock(state_mutex_);
      if (!dead_) {
        dead_ = true;
        death_reason_ = reason;
      }
      orphaned.swap(pending_);
    }
    for (auto& [id, promise] : orphaned) {
      promise.set_exception(std::make_exception_ptr(Error(ErrorKind::backend, reason)));
      on_done_();
    }
  }

  boost::process::opstream to_child_;
  boost::process::ipstream from_child_;
  boost::process::child child_;
  std::thread reader_;
  std::function<void()> on_done_;
  std::string remote_name_;

  std::mutex write_mutex_;
  std::mutex state_mutex_;
  std::map<long long, std::promise<double>> pending_;
  bool dead_ = false;
  std::string death_reason_;
};

}  // namespace detail

/// Client for scorers running as child processes speaking the line protocol.
/// Owns `workers` processes; requests go to the least-loaded one and at most
/// `max_in_flight` requests are outstanding across the pool.
class ExternalScorer final : public Scorer {
 public:
  explicit ExternalScorer(ExternalScorerConfig config)
      : config_(std::move(config)), slots_(static_cast<std::ptrdiff_t>(clamp_slots(config_))) {
    if (config_.command.empty()) config_error("external scorer needs a command");
    if (config_.workers < 1) config_error("external scorer needs at least one worker");
    // A dead child must surface as a write error, not kill this process.
    std::signal(SIGPIPE, SIG_IGN);
    for (std::size_t i = 0; i < config_.workers; ++i) {
      processes_.push_back(std::make_unique<detail::ScorerProcess>(
          config_.command, config_.image_mode, [this] { slots_.release(); }));
    }
    if (config_.image_mode == ImageMode::path) {
      std::random_device rd;
      scratch_ = std::filesystem::temp_directory_path() /
                 ("stairward-" + std::to_string(rd()) + "-" + std::to_string(rd()));
      std::filesystem::create_directories(scratch_);
    }
  }

  ~ExternalScorer() override {
    processes_.clear();
    std::error_code ec;
    if (!scratch_.empty()) std::filesystem::remove_all(scratch_, ec);
  }

  [[nodiscard]] std::string name() const override {
    if (!config_.name.empty()) return config_.name;
    return processes_.front()->remote_name();
  }

  [[nodiscard]] std::string remote_name() const { return processes_.front()->remote_name(); }

  [[nodiscard]] bool deterministic() const override { return false; }

  double score_raw(const ScoreItem& item) override {
    return score_raw_many(std::span<const ScoreItem>(&item, 1)).front();
  }

  std::vector<double> score_raw_many(std::span<const ScoreItem> items) override {
    std::vector<std::future<double>> futures;
    std::vector<std::filesystem::path> temporaries;
    futures.reserve(items.size());
    std::exception_ptr submit_error;
    std::size_t submit_error_index = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      try {
        const auto id = next_id_.fetch_add(1);
        const auto line = request_line(id, items[i], temporaries);
        slots_.acquire();
        futures.push_back(pick_process().submit(id, line));
      } catch (...) {
        submit_error = std::current_exception();
        submit_error_index = i;
        break;
      }
    }

    std::vector<double> out(futures.size());
    std::exception_ptr first_error;
    std::size_t first_index = 0;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        out[i] = futures[i].get();
      } catch (...) {
        if (!first_error) {
          first_error = std::current_exception();
          first_index = i;
        }
      }
    }
    std::error_code ec;
    for (const auto& p : temporaries) std::filesystem::remove(p, ec);
    if (first_error) detail::rethrow_indexed(first_index, first_error);
    if (submit_error) detail::rethrow_indexed(submit_error_index, submit_error);
    return out;
  }

 private:
  static std::size_t clamp_slots(const ExternalScorerConfig& c) {
    return std::max<std::size_t>(1, c.max_in_flight);
  }

  std::string request_line(long long id, const ScoreItem& item,
                           std::vector<std::filesystem::path>& temporaries) {
    if (!item.image) data_error("score request without an image");
    if (config_.image_mode == ImageMode::inline_png) {
      return protocol::score_inline(id, item.prompt, base64_encode(encode_png(*item.image)));
    }
    if (item.source_file) {
      return protocol::score_by_path(id, item.prompt, std::filesystem::absolute(*item.source_file));
    }
    auto path = scratch_ / ("req-" + std::to_string(id) + ".png");
    write_png(*item.image, path);
    temporaries.push_back(path);
    return protocol::score_by_path(id, item.prompt, path);
  }

  detail::ScorerProcess& pick_process() {
    std::lock_guard lock(pick_mutex_);
    auto* best = processes_.front().get();
    auto best_load = best->outstanding();
    for (std::size_t k = 1; k < processes_.size(); ++k) {
      const auto load = processes_[k]->outstanding();
      if (load < best_load) {
        best = processes_[k].get();
        best_load = load;
      }
    }
    return *best;
  }

  ExternalScorerConfig config_;
  std::counting_semaphore<> slots_;
  std::vector<std::unique_ptr<detail::ScorerProcess>> processes_;
  std::filesystem::path scratch_;
  std::atomic<long long> next_id_{1};
  std::mutex pick_mutex_;
};

}  // namespace stairward
