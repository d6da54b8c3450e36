#pragma once

#include <exception>
#include <string>

namespace rcr {

enum class ErrorKind {
    InvalidArgument,
    TemplateRender,
    TemplateFile,
    // backend failures, kept distinct so callers can react per kind
    Timeout,
    RateLimited,
    Transport,
    MalformedResponse,
    AuthMissing,
    CacheIo,
    Io,
    XmlMalformed,
    SchemaViolation,
    DuplicateKey,
    UnknownInstance,
    DuplicatePrediction,
    EmptyMatrix,
    Pipeline,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. Context fields (prompt hash,
// instance id, pipeline step) are attached as the error travels up so the
// final message names where things went wrong.
class Error : public std::exception {
public:
    Error(ErrorKind kind, std::string message);

    const char* what() const noexcept override { return full_.c_str(); }
    ErrorKind kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& prompt_hash() const noexcept { return prompt_hash_; }
    const std::string& instance_id() const noexcept { return instance_id_; }
    const std::string& step() const noexcept { return step_; }

    Error& with_prompt_hash(std::string hash);
    Error& with_instance(std::string instance_id);
    Error& with_step(std::string step);

private:
    void rebuild();

    ErrorKind kind_;
    std::string message_;
    std::string prompt_hash_;
    std::string instance_id_;
    std::string step_;
    std::string full_;
};

}  // namespace rcr
