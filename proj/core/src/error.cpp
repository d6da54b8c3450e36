#include "rcr/error.hpp"

#include <utility>

namespace rcr {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::TemplateRender: return "template-render";
        case ErrorKind::TemplateFile: return "template-file";
        case ErrorKind::Timeout: return "timeout";
        case ErrorKind::RateLimited: return "rate-limited";
        case ErrorKind::Transport: return "transport";
        case ErrorKind::MalformedResponse: return "malformed-response";
        case ErrorKind::AuthMissing: return "auth-missing";
        case ErrorKind::CacheIo: return "cache-io";
        case ErrorKind::Io: return "io";
        case ErrorKind::XmlMalformed: return "xml-malformed";
        case ErrorKind::SchemaViolation: return "schema-violation";
        case ErrorKind::DuplicateKey: return "duplicate-key";
        case ErrorKind::UnknownInstance: return "unknown-instance";
        case ErrorKind::DuplicatePrediction: return "duplicate-prediction";
        case ErrorKind::EmptyMatrix: return "empty-matrix";
        case ErrorKind::Pipeline: return "pipeline";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string message)
    : kind_(kind), message_(std::move(message)) {
    rebuild();
}

Error& Error::with_prompt_hash(std::string hash) {
    prompt_hash_ = std::move(hash);
    rebuild();
    return *this;
}

Error& Error::with_instance(std::string instance_id) {
    instance_id_ = std::move(instance_id);
    rebuild();
    return *this;
}

Error& Error::with_step(std::string step) {
    step_ = std::move(step);
    rebuild();
    return *this;
}

void Error::rebuild() {
    full_ = std::string("[") + to_string(kind_) + "] " + message_;
    if (!step_.empty()) full_ += " (step: " + step_ + ")";
    if (!instance_id_.empty()) full_ += " (instance: " + instance_id_ + ")";
    if (!prompt_hash_.empty()) full_ += " (prompt: " + prompt_hash_ + ")";
}

}  // namespace rcr
