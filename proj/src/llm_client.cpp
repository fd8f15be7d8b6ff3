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

#include "hiprompt/llm_client.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "hiprompt/text.hpp"

namespace hiprompt {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Mock backends

std::optional<PromptTestBlock> extract_test_block(std::string_view prompt) {
    constexpr std::string_view query_tag = "Query: ";
    constexpr std::string_view choices_tag = "Choices: ";
    std::size_t pos = prompt.rfind(std::string("\n") + std::string(query_tag));
    pos = pos == std::string_view::npos ? (prompt.starts_with(query_tag) ? 0 : pos) : pos + 1;
    if (pos == std::string_view::npos) return std::nullopt;

    auto line_at = [&](std::size_t start) {
        const auto end = prompt.find('\n', start);
        return prompt.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    };
    const auto query_line = line_at(pos);
    const auto next = pos + query_line.size() + 1;
    if (next >= prompt.size()) return std::nullopt;
    const auto choices_line = line_at(next);
    if (!choices_line.starts_with(choices_tag)) return std::nullopt;

    PromptTestBlock block;
    block.query = std::string(trim(query_line.substr(query_tag.size())));
    for (const auto& piece : split(choices_line.substr(choices_tag.size()), ';')) {
        const auto item = trim(piece);
        if (!item.empty()) block.choices.emplace_back(item);
    }
    return block;
}

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += "; ";
        out += items[i];
    }
    return out;
}

PromptTestBlock require_block(const CompletionRequest& req) {
    if (req.prompt.empty()) throw BackendError(BackendError::Kind::Permanent, 0, "empty prompt");
    auto block = extract_test_block(req.prompt);
    if (!block) throw BackendError(BackendError::Kind::Permanent, 0, "prompt has no Query/Choices block");
    return *block;
}

}  // namespace

std::string EchoBackend::complete(const CompletionRequest& req) { return join(require_block(req).choices); }

std::string ReverseBackend::complete(const CompletionRequest& req) {
    auto choices = require_block(req).choices;
    std::reverse(choices.begin(), choices.end());
    return join(choices);
}

std::string OracleBackend::complete(const CompletionRequest& req) {
    auto block = require_block(req);
    auto gold = gold_by_query_.find(block.query);
    if (gold != gold_by_query_.end()) {
        auto it = std::find(block.choices.begin(), block.choices.end(), gold->second);
        if (it != block.choices.end()) std::rotate(block.choices.begin(), it, it + 1);
    }
    return join(block.choices);
}

// ---------------------------------------------------------------------------
// Throttling

std::chrono::milliseconds RetryPolicy::ceiling(int attempt) const {
    auto delay = base_delay;
    for (int i = 1; i < attempt && delay < max_delay; ++i) delay *= 2;
    return std::min(delay, max_delay);
}

void RateLimiter::acquire() {
    if (rate_ <= 0.0) return;
    Clock::time_point slot;
    {
        std::lock_guard lock(mu_);
        const auto now = Clock::now();
        slot = std::max(now, next_);
        next_ = slot + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate_));
    }
    std::this_thread::sleep_until(slot);
}

ConcurrencyLimiter::ConcurrencyLimiter(std::size_t cap) : cap_(cap) {
    if (cap == 0) throw std::invalid_argument("concurrency cap must be at least 1");
}

void ConcurrencyLimiter::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < cap_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard lock(mu_);
        --in_flight_;
    }
    cv_.notify_one();
}

std::size_t ConcurrencyLimiter::peak() const {
    std::lock_guard lock(mu_);
    return peak_;
}

// ---------------------------------------------------------------------------
// Live backend

HttpTransport make_http_transport(const std::string& endpoint, const std::string& api_key,
                                  std::chrono::seconds timeout) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start = endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string base = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    return [base, path, api_key, timeout](const std::string& body) {
        httplib::Client client(base);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = client.Post(path, headers, body, "application/json");
        HttpResponse out;
        if (!res) {
            out.timed_out = res.error() == httplib::Error::ConnectionTimeout || res.error() == httplib::Error::Read;
            out.body = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    };
}

LiveBackend::LiveBackend(LiveBackendConfig cfg, HttpTransport transport, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      rate_(cfg_.requests_per_second),
      limiter_(cfg_.concurrency),
      rng_(cfg_.jitter_seed) {
    if (!transport_) transport_ = make_http_transport(cfg_.endpoint, cfg_.api_key, cfg_.timeout);
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string LiveBackend::request_body(const CompletionRequest& req) const {
    json body;
    body["model"] = req.model.empty() ? cfg_.model : req.model;
    body["prompt"] = req.prompt;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_output_tokens;
    body["stop"] = json::array({"\nQuery:"});
    return body.dump();
}

std::string LiveBackend::parse_completion(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw BackendError(BackendError::Kind::Permanent, 200, std::string("malformed completion response: ") + e.what());
    }
    if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
        const auto& first = doc["choices"][0];
        if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
        if (first.contains("message") && first["message"].contains("content") &&
            first["message"]["content"].is_string()) {
            return first["message"]["content"].get<std::string>();
        }
    }
    throw BackendError(BackendError::Kind::Permanent, 200, "completion response carries no choice text");
}

std::chrono::milliseconds LiveBackend::jitter(int attempt) {
    const auto ceiling = cfg_.retry.ceiling(attempt).count();
    std::lock_guard lock(rng_mu_);
    std::uniform_int_distribution<long long> dist(0, ceiling);
    return std::chrono::milliseconds(dist(rng_));
}

namespace {

bool is_budget_refusal(const HttpResponse& r) {
    if (r.status == 413) return true;
    if (r.status != 400) return false;
    return r.body.find("context_length_exceeded") != std::string::npos ||
           r.body.find("maximum context length") != std::string::npos;
}

}  // namespace

std::string LiveBackend::complete(const CompletionRequest& req) {
    if (req.prompt.empty()) throw BackendError(BackendError::Kind::Permanent, 0, "empty prompt");
    if (req.temperature < 0.0 || req.temperature > 2.0) {
        throw BackendError(BackendError::Kind::Permanent, 0, "temperature must lie in [0, 2]");
    }
    const auto body = request_body(req);
    HttpResponse last;
    for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
        if (attempt > 1) sleeper_(jitter(attempt - 1));
        rate_.acquire();
        {
            ConcurrencyLimiter::Slot slot(limiter_);
            last = transport_(body);
        }
        if (last.status >= 200 && last.status < 300) return parse_completion(last.body);
        if (is_budget_refusal(last)) {
            throw BackendError(BackendError::Kind::BudgetExceeded, last.status, "endpoint refused prompt length: " + last.body);
        }
        const bool transient = last.status == 0 || last.status == 408 || last.status == 429 || last.status >= 500;
        if (!transient) {
            throw BackendError(BackendError::Kind::Permanent, last.status,
                               "HTTP " + std::to_string(last.status) + ": " + last.body);
        }
    }
    const auto attempts = std::to_string(cfg_.retry.max_attempts);
    if (last.timed_out) {
        throw BackendError(BackendError::Kind::Timeout, 0, "request timed out after " + attempts + " attempts");
    }
    throw BackendError(BackendError::Kind::Permanent, last.status,
                       "giving up after " + attempts + " attempts (last status " + std::to_string(last.status) +
                           "): " + last.body);
}

// ---------------------------------------------------------------------------
// Cache

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0F]);
    }
    return out;
}

namespace {

constexpr std::string_view kCacheMagic = "hiprompt-cache-v1 ";

}  // namespace

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::string ResponseCache::key(const CompletionRequest& req) {
    char temperature[32];
    std::snprintf(temperature, sizeof temperature, "%.17g", req.temperature);
    std::string material = std::to_string(req.model.size()) + ":" + req.model + "\n" + temperature + "\n" + req.prompt;
    return sha256_hex(material);
}

fs::path ResponseCache::entry_path(const std::string& key) const { return dir_ / (key + ".txt"); }

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(entry_path(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto content = buf.str();
    const auto newline = content.find('\n');
    if (newline == std::string::npos) return std::nullopt;
    const std::string_view header(content.data(), newline);
    if (!header.starts_with(kCacheMagic)) return std::nullopt;
    auto text = content.substr(newline + 1);
    if (header.substr(kCacheMagic.size()) != sha256_hex(text)) return std::nullopt;
    return text;
}

void ResponseCache::put(const std::string& key, const std::string& text) {
    const auto path = entry_path(key);
    auto tmp = path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
        out << kCacheMagic << sha256_hex(text) << '\n' << text;
    }
    fs::rename(tmp, path);
}

std::mutex& ResponseCache::lock_for(const std::string& key) {
    std::lock_guard lock(map_mu_);
    auto& slot = key_locks_[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

std::string cached_complete(ResponseCache& cache, Backend& backend, const CompletionRequest& req) {
    const auto key = ResponseCache::key(req);
    std::lock_guard lock(cache.lock_for(key));
    if (auto hit = cache.get(key)) return *hit;
    auto text = backend.complete(req);
    cache.put(key, text);
    return text;
}

std::string cached_complete(const fs::path& cache_dir, Backend& backend, const CompletionRequest& req) {
    ResponseCache cache(cache_dir);
    return cached_complete(cache, backend, req);
}

}  // namespace hiprompt
