#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "olympus/controller.hpp"

namespace olympus {

class ControllerUnavailableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The remote controller answered, but its text does not parse as a
// routed response. The raw text is preserved for logging.
class MalformedControllerOutputError : public std::runtime_error {
public:
    MalformedControllerOutputError(std::string detail, std::string raw_text);
    const std::string& raw_text() const { return raw_text_; }

private:
    std::string raw_text_;
};

// Connection-level failure (unreachable, timeout); retryable.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transport boundary so tests can script failures without sockets.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;

    struct Reply {
        int status;
        std::string body;
    };

    // Sends one JSON request document; throws TransportError when no
    // reply was obtained at all.
    virtual Reply send(const std::string& json_payload) = 0;
};

struct RemoteEndpointConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/route
    // Bearer credential; the OLYMPUS_API_KEY environment variable
    // overrides the configured value.
    std::string api_key;
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_base_ms = 100;
};

std::unique_ptr<ChatTransport> make_http_transport(const RemoteEndpointConfig& config);

// Adapter for a fine-tuned controller served over HTTP. Sends
// {instruction, attachments, history}, expects {text}, and parses the
// text into a RoutedResponse. Transient transport failures and 5xx
// replies are retried with exponential backoff.
class LlmController final : public Controller {
public:
    LlmController(std::shared_ptr<ChatTransport> transport, RemoteEndpointConfig config);

    RoutedResponse route(const ControllerRequest& request) const override;

    // Cumulative retry count across all calls, for diagnostics.
    uint64_t total_retries() const { return total_retries_.load(); }

private:
    std::shared_ptr<ChatTransport> transport_;
    RemoteEndpointConfig config_;
    mutable std::atomic<uint64_t> total_retries_{0};
};

}  // namespace olympus
