// Test double speaking the NDJSON scorer protocol. The score is an FNV-1a
// hash of the prompt and decoded pixels mapped into [0, 1), so path and
// inline transport of the same crop must agree.
//
//   --version N         advertise protocol version N in the handshake
//   --fatal MSG         answer the handshake with a fatal message and exit 2
//   --crash-after N     exit(1) on receiving score request number N+1
//   --error-on TEXT     reply with an error when the prompt contains TEXT
//   --null-on TEXT      reply with a null score when the prompt contains TEXT
//   --reverse           answer requests pairwise in reverse order
//   --log FILE          append each received score prompt to FILE

#include <poll.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "json.hpp"
#include "stairward/image_codec.hpp"

using nlohmann::json;

namespace {

struct Options {
  int version = 1;
  std::string fatal;
  long crash_after = -1;
  std::string error_on;
  std::string null_on;
  bool reverse = false;
  std::string log;
};

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double score_of(const std::string& prompt, const stairward::Raster& img) {
  std::uint64_t h = 14695981039346656037ULL;
  h = fnv1a(h, prompt.data(), prompt.size());
  const std::size_t dims[2] = {img.width(), img.height()};
  h = fnv1a(h, dims, sizeof dims);
  h = fnv1a(h, img.pixels().data(), img.pixels().size());
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void emit(const json& j) {
  std::cout << j.dump() << '\n' << std::flush;
}

class LineReader {
 public:
  // Returns nullopt on EOF, or an empty optional-with-timeout flag via `timed_out`.
  std::optional<std::string> next(int timeout_ms, bool& timed_out) {
    timed_out = false;
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        auto line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      if (eof_) {
        if (buf_.empty()) return std::nullopt;
        auto line = std::move(buf_);
        buf_.clear();
        return line;
      }
      pollfd pfd{0, POLLIN, 0};
      const int ready = poll(&pfd, 1, timeout_ms);
      if (ready == 0) {
        timed_out = true;
        return std::nullopt;
      }
      char chunk[65536];
      const auto n = read(0, chunk, sizeof chunk);
      if (n <= 0) {
        eof_ = true;
      } else {
        buf_.append(chunk, static_cast<std::size_t>(n));
      }
    }
  }

 private:
  std::string buf_;
  bool eof_ = false;
};

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto value = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
    if (a == "--version") opt.version = std::stoi(value());
    else if (a == "--fatal") opt.fatal = value();
    else if (a == "--crash-after") opt.crash_after = std::stol(value());
    else if (a == "--error-on") opt.error_on = value();
    else if (a == "--null-on") opt.null_on = value();
    else if (a == "--reverse") opt.reverse = true;
    else if (a == "--log") opt.log = value();
  }

  LineReader reader;
  bool timed_out = false;
  auto first = reader.next(-1, timed_out);
  if (!first) return 1;
  if (!opt.fatal.empty()) {
    emit({{"op", "fatal"}, {"message", opt.fatal}});
    return 2;
  }
  emit({{"op", "hello"}, {"version", opt.version}, {"name", "fake"}});

  long received = 0;
  std::optional<json> held;
  auto flush_held = [&] {
    if (held) emit(*held);
    held.reset();
  };

  for (;;) {
    auto line = reader.next(held ? 50 : -1, timed_out);
    if (timed_out) {
      flush_held();
      continue;
    }
    if (!line) break;
    json msg;
    try {
      msg = json::parse(*line);
    } catch (const json::exception&) {
      emit({{"op", "error"}, {"id", -1}, {"message", "malformed request"}});
      continue;
    }
    const auto op = msg.value("op", std::string{});
    if (op == "bye") break;
    const auto id = msg.contains("id") && msg["id"].is_number_integer() ? msg["id"].get<long long>() : -1;
    if (op != "score" || !msg.contains("prompt") || !msg["prompt"].is_string()) {
      emit({{"op", "error"}, {"id", id}, {"message", "malformed request"}});
      continue;
    }
    if (opt.crash_after >= 0 && received >= opt.crash_after) std::_Exit(1);
    ++received;

    const auto prompt = msg["prompt"].get<std::string>();
    if (!opt.log.empty()) std::ofstream(opt.log, std::ios::app) << prompt << '\n';

    json reply;
    try {
      const auto img = msg.contains("image_b64")
                           ? stairward::decode_image_bytes(
                                 stairward::base64_decode(msg["image_b64"].get<std::string>()), "<inline>")
                           : stairward::decode_image(msg.at("image_path").get<std::string>());
      if (!opt.error_on.empty() && prompt.find(opt.error_on) != std::string::npos) {
        reply = {{"op", "error"}, {"id", id}, {"message", "refused prompt"}};
      } else if (!opt.null_on.empty() && prompt.find(opt.null_on) != std::string::npos) {
        reply = {{"op", "result"}, {"id", id}, {"score", nullptr}};
      } else {
        reply = {{"op", "result"}, {"id", id}, {"score", score_of(prompt, img)}};
      }
    } catch (const std::exception& e) {
      reply = {{"op", "error"}, {"id", id}, {"message", e.what()}};
    }

    if (!opt.reverse) {
      emit(reply);
    } else if (held) {
      emit(reply);
      flush_held();
    } else {
      held = reply;
    }
  }
  flush_held();
  return 0;
}
