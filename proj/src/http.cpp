#include "facts/http.hpp"

#include <algorithm>
#include <cctype>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace facts::http {

std::optional<Url> parse_url(std::string_view text) {
    const auto sep = text.find("://");
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    std::string scheme(text.substr(0, sep));
    std::transform(scheme.begin(), scheme.end(), scheme.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (scheme != "http" && scheme != "https") return std::nullopt;
    const auto rest = text.substr(sep + 3);
    const auto slash = rest.find_first_of("/?#");
    const auto authority = rest.substr(0, slash);
    if (authority.empty() || authority.find_first_of(" \t") != std::string_view::npos)
        return std::nullopt;
    Url url;
    url.scheme = scheme;
    url.origin = scheme + "://" + std::string(authority);
    url.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    if (url.path.front() != '/') url.path.insert(url.path.begin(), '/');
    if (const auto hash = url.path.find('#'); hash != std::string::npos) url.path.resize(hash);
    return url;
}

namespace {

httplib::Client make_client(const Url& url, std::chrono::seconds timeout) {
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    client.set_follow_location(true);
    return client;
}

Response convert(const httplib::Result& result) {
    Response out;
    if (!result) {
        out.error = httplib::to_string(result.error());
        return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
}

}  // namespace

Response get(const Url& url, std::chrono::seconds timeout) {
    auto client = make_client(url, timeout);
    return convert(client.Get(url.path));
}

Response post_json(const Url& url, const std::string& body, std::chrono::seconds timeout) {
    auto client = make_client(url, timeout);
    return convert(client.Post(url.path, body, "application/json"));
}

}  // namespace facts::http
