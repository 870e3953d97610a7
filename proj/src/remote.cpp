#include "olympus/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "olympus/parser.hpp"

namespace olympus {

namespace {

using nlohmann::json;

class HttpChatTransport final : public ChatTransport {
public:
    explicit HttpChatTransport(RemoteEndpointConfig config) : config_(std::move(config)) {
        std::string base = config_.endpoint;
        path_ = "/";
        size_t scheme = base.find("://");
        size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (slash != std::string::npos) {
            path_ = base.substr(slash);
            base = base.substr(0, slash);
        }
        base_ = base;
        if (const char* key = std::getenv("OLYMPUS_API_KEY"))
            config_.api_key = key;
    }

    Reply send(const std::string& json_payload) override {
        httplib::Client client(base_);
        client.set_connection_timeout(0, config_.timeout_ms * 1000);
        client.set_read_timeout(0, config_.timeout_ms * 1000);
        client.set_write_timeout(0, config_.timeout_ms * 1000);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        auto res = client.Post(path_, headers, json_payload, "application/json");
        if (!res)
            throw TransportError("no response from " + config_.endpoint + ": " +
                                 httplib::to_string(res.error()));
        return Reply{res->status, res->body};
    }

private:
    RemoteEndpointConfig config_;
    std::string base_;
    std::string path_;
};

}  // namespace

MalformedControllerOutputError::MalformedControllerOutputError(std::string detail,
                                                               std::string raw_text)
    : std::runtime_error(std::move(detail)), raw_text_(std::move(raw_text)) {}

std::unique_ptr<ChatTransport> make_http_transport(const RemoteEndpointConfig& config) {
    return std::make_unique<HttpChatTransport>(config);
}

LlmController::LlmController(std::shared_ptr<ChatTransport> transport,
                             RemoteEndpointConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {}

RoutedResponse LlmController::route(const ControllerRequest& request) const {
    json payload;
    payload["instruction"] = request.instruction;
    payload["attachments"] = json::array();
    for (const Artifact& attachment : request.attachments)
        payload["attachments"].push_back(attachment.locator);
    payload["history"] = json::array();
    for (const Turn& turn : request.history)
        payload["history"].push_back(
            {{"instruction", turn.instruction}, {"response", turn.response}});
    std::string body = payload.dump();

    ChatTransport::Reply reply{0, {}};
    std::string last_failure;
    bool have_reply = false;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            total_retries_.fetch_add(1);
            auto backoff = std::chrono::milliseconds(
                static_cast<int64_t>(config_.backoff_base_ms) << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        try {
            reply = transport_->send(body);
        } catch (const TransportError& e) {
            last_failure = e.what();
            continue;
        }
        if (reply.status >= 500) {
            last_failure = "HTTP " + std::to_string(reply.status);
            continue;
        }
        have_reply = true;
        break;
    }
    if (!have_reply)
        throw ControllerUnavailableError("controller unreachable after " +
                                         std::to_string(config_.max_retries) +
                                         " retries: " + last_failure);
    if (reply.status != 200)
        throw ControllerUnavailableError("controller returned HTTP " +
                                         std::to_string(reply.status));

    json doc = json::parse(reply.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("text") || !doc["text"].is_string())
        throw MalformedControllerOutputError("controller reply lacks a text field",
                                             reply.body);
    std::string text = doc["text"].get<std::string>();
    try {
        return parse_response(text);
    } catch (const ParseError& e) {
        throw MalformedControllerOutputError(
            std::string("controller text does not parse: ") + e.what(), text);
    }
}

}  // namespace olympus
