/*
 * Copyright 2026 The HiPrompt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hiprompt {

struct CompletionRequest {
    std::string prompt;
    std::size_t max_output_tokens = 256;
    double temperature = 0.0;
    std::string model;
};

class BackendError : public std::runtime_error {
  public:
    enum class Kind { Transient, Permanent, Timeout, BudgetExceeded };

    BackendError(Kind kind, int status, const std::string& message)
        : std::runtime_error(message), kind_(kind), status_(status) {}

    Kind kind() const noexcept { return kind_; }
    /// HTTP status of the last attempt; 0 when no response arrived.
    int status() const noexcept { return status_; }

  private:
    Kind kind_;
    int status_;
};

/// A text-completion function. Implementations must be safe to call from several threads.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual std::string_view name() const = 0;
};

/// The query and choice list of the final (test) block of an assembled prompt.
struct PromptTestBlock {
    std::string query;
    std::vector<std::string> choices;
};
std::optional<PromptTestBlock> extract_test_block(std::string_view prompt);

/// Returns the test block's choices in the order given.
class EchoBackend final : public Backend {
  public:
    std::string complete(const CompletionRequest& req) override;
    std::string_view name() const override { return "echo"; }
};

/// Returns the test block's choices reversed.
class ReverseBackend final : public Backend {
  public:
    std::string complete(const CompletionRequest& req) override;
    std::string_view name() const override { return "reverse"; }
};

/// Knows the gold term name for each query name; moves it to the front when it is a choice.
class OracleBackend final : public Backend {
  public:
    explicit OracleBackend(std::map<std::string, std::string> gold_by_query)
        : gold_by_query_(std::move(gold_by_query)) {}
    std::string complete(const CompletionRequest& req) override;
    std::string_view name() const override { return "oracle"; }

  private:
    std::map<std::string, std::string> gold_by_query_;
};

/// Forwards to another backend and counts invocations.
class CountingBackend final : public Backend {
  public:
    explicit CountingBackend(Backend& inner) : inner_(inner) {}
    std::string complete(const CompletionRequest& req) override {
        ++calls_;
        return inner_.complete(req);
    }
    std::string_view name() const override { return inner_.name(); }
    std::size_t calls() const noexcept { return calls_.load(); }

  private:
    Backend& inner_;
    std::atomic<std::size_t> calls_{0};
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    std::chrono::milliseconds max_delay{32000};

    /// Upper bound of the full-jitter window before retry number `attempt` (1-based).
    std::chrono::milliseconds ceiling(int attempt) const;
};

/// Token bucket with capacity one: at most `rate` acquisitions per second. rate <= 0 disables it.
class RateLimiter {
  public:
    explicit RateLimiter(double rate) : rate_(rate) {}
    void acquire();

  private:
    using Clock = std::chrono::steady_clock;
    double rate_;
    std::mutex mu_;
    Clock::time_point next_{};
};

/// Counting semaphore that also tracks the peak number of holders.
class ConcurrencyLimiter {
  public:
    explicit ConcurrencyLimiter(std::size_t cap);

    class Slot {
      public:
        explicit Slot(ConcurrencyLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
        ~Slot() { limiter_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

      private:
        ConcurrencyLimiter& limiter_;
    };

    std::size_t cap() const noexcept { return cap_; }
    std::size_t peak() const;

  private:
    void acquire();
    void release();

    std::size_t cap_;
    std::size_t in_flight_ = 0;
    std::size_t peak_ = 0;
    mutable std::mutex mu_;
    std::condition_variable cv_;
};

struct HttpResponse {
    int status = 0;  // 0: no response
    std::string body;
    bool timed_out = false;
};

/// Sends one JSON body to the configured endpoint.
using HttpTransport = std::function<HttpResponse(const std::string& body)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct LiveBackendConfig {
    std::string endpoint;  // e.g. https://api.openai.com/v1/completions
    std::string api_key;
    std::string model;     // used when the request leaves it empty
    std::chrono::seconds timeout{60};
    std::size_t concurrency = 4;
    double requests_per_second = 1.0;
    RetryPolicy retry;
    std::uint64_t jitter_seed = 0x5eed;
};

/// OpenAI-compatible completion endpoint: one POST per attempt carrying model,
/// prompt, temperature and max_tokens; the first choice's text is returned.
class LiveBackend final : public Backend {
  public:
    explicit LiveBackend(LiveBackendConfig cfg, HttpTransport transport = {}, Sleeper sleeper = {});

    std::string complete(const CompletionRequest& req) override;
    std::string_view name() const override { return "live"; }

    std::size_t peak_in_flight() const { return limiter_.peak(); }
    std::string request_body(const CompletionRequest& req) const;
    static std::string parse_completion(const std::string& body);

  private:
    std::chrono::milliseconds jitter(int attempt);

    LiveBackendConfig cfg_;
    HttpTransport transport_;
    Sleeper sleeper_;
    RateLimiter rate_;
    ConcurrencyLimiter limiter_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
};

/// Default transport built on cpp-httplib.
HttpTransport make_http_transport(const std::string& endpoint, const std::string& api_key,
                                  std::chrono::seconds timeout);

std::string sha256_hex(std::string_view data);

/// One text file per request key. Entries carry a checksum header; an entry
/// whose checksum does not match is treated as missing.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path dir);

    /// SHA-256 over (model, temperature, prompt).
    static std::string key(const CompletionRequest& req);
    std::filesystem::path entry_path(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& text);
    /// Serializes work on a single key.
    std::mutex& lock_for(const std::string& key);

  private:
    std::filesystem::path dir_;
    std::mutex map_mu_;
    std::map<std::string, std::unique_ptr<std::mutex>> key_locks_;
};

std::string cached_complete(ResponseCache& cache, Backend& backend, const CompletionRequest& req);
std::string cached_complete(const std::filesystem::path& cache_dir, Backend& backend, const CompletionRequest& req);

}  // namespace hiprompt
