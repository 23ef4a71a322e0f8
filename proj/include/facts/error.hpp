#pragma once

#include <stdexcept>
#include <string>

namespace facts {

// Base of every error the pipeline raises. The CLI maps ConfigError to exit
// status 2 and everything else derived from Error to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path)
        : Error("missing file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class WriteError : public Error {
public:
    using Error::Error;
};

class DuplicateSourceId : public Error {
public:
    explicit DuplicateSourceId(const std::string& id)
        : Error("duplicate source_id: " + id), id_(id) {}
    const std::string& source_id() const noexcept { return id_; }

private:
    std::string id_;
};

class ExtractionFailed : public Error {
public:
    ExtractionFailed(int exit_status, std::string diagnostics)
        : Error("text extraction failed (exit status " + std::to_string(exit_status) +
                "): " + diagnostics),
          exit_status_(exit_status),
          diagnostics_(std::move(diagnostics)) {}
    int exit_status() const noexcept { return exit_status_; }
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    int exit_status_;
    std::string diagnostics_;
};

class UnsupportedInput : public Error {
public:
    using Error::Error;
};

class EmptyQuestion : public ConfigError {
public:
    EmptyQuestion() : ConfigError("research question must not be empty") {}
};

class ModelUnavailable : public Error {
public:
    using Error::Error;
};

class MalformedResponse : public Error {
public:
    using Error::Error;
};

class EmptyVocabulary : public Error {
public:
    EmptyVocabulary() : Error("no term survives vocabulary filtering") {}
};

class EmptyCorpus : public Error {
public:
    EmptyCorpus() : Error("document-term matrix holds no tokens") {}
};

class LambdaOutOfRange : public ConfigError {
public:
    explicit LambdaOutOfRange(double lambda)
        : ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda)) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotSymmetric : public Error {
public:
    NotSymmetric() : Error("distance matrix is not symmetric") {}
};

class MissingBundle : public Error {
public:
    using Error::Error;
};

}  // namespace facts
