#pragma once
// Model backends: the contract the trainer and evaluator call, plus a
// chat-completion client for remote multimodal models.

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>

#include "pgds/common.hpp"
#include "pgds/metrics.hpp"
#include "pgds/prompt.hpp"

namespace pgds {

// Failures a caller may retry (timeouts, HTTP errors, transport errors)
// derive from BackendError. CapabilityError is raised before any request is
// sent and is not worth retrying.
class BackendError : public RuntimeFailure {
  public:
    using RuntimeFailure::RuntimeFailure;
};

class TimeoutError : public BackendError {
  public:
    using BackendError::BackendError;
};

class HttpStatusError : public BackendError {
  public:
    HttpStatusError(int status, const std::string& what) : BackendError(what), status_(status) {}
    int status() const { return status_; }

  private:
    int status_;
};

class TransportError : public BackendError {
  public:
    using BackendError::BackendError;
};

class CapabilityError : public RuntimeFailure {
  public:
    using RuntimeFailure::RuntimeFailure;
};

struct BackendCapabilities {
    bool supports_images = true;
    bool supports_multi_image = true;
};

class ModelBackend {
  public:
    virtual ~ModelBackend() = default;
    virtual std::string respond(const PromptBundle& bundle) = 0;
    virtual BackendCapabilities capabilities() const = 0;
};

// Throws CapabilityError when the bundle needs features the backend lacks.
void check_capabilities(const BackendCapabilities& caps, const PromptBundle& bundle);

struct RemoteConfig {
    std::string url;  // full endpoint, e.g. https://host/v1/chat/completions
    std::string api_key;
    std::string model;
    std::chrono::milliseconds timeout{60000};
    std::filesystem::path image_root;
    BackendCapabilities capabilities;
    int max_tokens = 512;
    double temperature = 0.0;

    // PGDS_API_URL, PGDS_API_KEY, PGDS_MODEL. Throws ValidationError when the
    // URL or model is missing.
    static RemoteConfig from_env();
};

using LogSink = std::function<void(const std::string&)>;

class RemoteBackend final : public ModelBackend {
  public:
    explicit RemoteBackend(RemoteConfig config, LogSink log = {});
    std::string respond(const PromptBundle& bundle) override;
    BackendCapabilities capabilities() const override { return config_.capabilities; }

    // Request body for a bundle (images read and base64-encoded).
    Json request_body(const PromptBundle& bundle) const;

  private:
    RemoteConfig config_;
    LogSink log_;
};

// Copy of a request or response body safe to log: the credential is masked
// and inline image payloads are replaced by their length.
std::string redact(std::string text, const std::string& secret);

// Scores a (predicted, gold) pair by asking a backend for a number in
// [0, 1]. Equal strings score 1 without a call; a reply with no number scores 0.
class RemoteJudgeScorer final : public TextScorer {
  public:
    explicit RemoteJudgeScorer(ModelBackend& backend) : backend_(backend) {}
    double score(std::string_view predicted, std::string_view gold) const override;

  private:
    ModelBackend& backend_;
};

}  // namespace pgds
