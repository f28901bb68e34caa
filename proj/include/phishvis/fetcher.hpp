#pragma once

// Raw HTML retrieval. Only the single GET chain for the submitted URL is
// performed: no subresources, no script execution, no content decoding.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>

#include "httplib.h"

#include "phishvis/bytevis.hpp"
#include "phishvis/error.hpp"

namespace phishvis {

/// A URL reduced to the form used as the cache key.
struct NormalizedUrl {
    std::string scheme; ///< "http" or "https"
    std::string host;   ///< lowercased; IPv6 literals keep their brackets
    std::optional<std::uint16_t> port; ///< absent when it is the scheme default
    std::string path = "/";
    std::string query; ///< without the leading '?'

    std::uint16_t effective_port() const { return port.value_or(scheme == "https" ? 443 : 80); }

    std::string path_and_query() const { return query.empty() ? path : path + "?" + query; }

    std::string origin() const {
        std::string out = scheme + "://" + host;
        if (port) out += ":" + std::to_string(*port);
        return out;
    }

    std::string str() const { return origin() + path_and_query(); }

    friend bool operator==(const NormalizedUrl&, const NormalizedUrl&) = default;
};

namespace url_detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool is_scheme_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

} // namespace url_detail

inline NormalizedUrl normalize_url(std::string_view raw) {
    using url_detail::lower;
    auto invalid = [&](const char* why) { return Error(ErrorKind::InvalidUrl, std::string(why) + ": '" + std::string(raw) + "'"); };

    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);

    const auto colon = raw.find(':');
    if (colon == std::string_view::npos || colon == 0 || !std::isalpha(static_cast<unsigned char>(raw[0])) ||
        !std::all_of(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(colon), url_detail::is_scheme_char)) {
        throw invalid("missing scheme");
    }
    NormalizedUrl url;
    url.scheme = lower(raw.substr(0, colon));
    if (url.scheme != "http" && url.scheme != "https") {
        throw Error(ErrorKind::UnsupportedScheme, "scheme '" + url.scheme + "' is not http or https");
    }
    std::string_view rest = raw.substr(colon + 1);
    if (rest.substr(0, 2) != "//") throw invalid("missing authority");
    rest.remove_prefix(2);

    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

    const auto authority_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, authority_end);
    std::string_view tail = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (authority.find('@') != std::string_view::npos) throw invalid("credentials in URL are not accepted");
    if (authority.find_first_of(" \t\r\n") != std::string_view::npos) throw invalid("whitespace in host");

    std::string_view host = authority;
    std::string_view port_text;
    if (!authority.empty() && authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) throw invalid("unterminated IPv6 literal");
        host = authority.substr(0, close + 1);
        const auto after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') throw invalid("garbage after IPv6 literal");
            port_text = after.substr(1);
        }
    } else if (const auto pc = authority.rfind(':'); pc != std::string_view::npos) {
        host = authority.substr(0, pc);
        port_text = authority.substr(pc + 1);
    }
    if (host.empty() || host == "[]") throw invalid("empty host");
    url.host = lower(host);

    if (!port_text.empty()) {
        if (port_text.size() > 5 || !std::all_of(port_text.begin(), port_text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            throw invalid("bad port");
        }
        const long port = std::stol(std::string(port_text));
        if (port < 1 || port > 65535) throw invalid("port out of range");
        const long default_port = url.scheme == "https" ? 443 : 80;
        if (port != default_port) url.port = static_cast<std::uint16_t>(port);
    }

    const auto q = tail.find('?');
    const std::string_view path = tail.substr(0, q);
    url.path = path.empty() ? "/" : std::string(path);
    if (q != std::string_view::npos) url.query = std::string(tail.substr(q + 1));
    return url;
}

struct FetchConfig {
    std::chrono::seconds timeout{10};
    unsigned max_redirects = 5;
    std::size_t max_body_bytes = 5u << 20;
    std::string user_agent = "phishvis/1.0";
    bool verify_tls = true;

    void validate() const {
        if (timeout.count() <= 0 || max_redirects == 0 || max_body_bytes == 0 || user_agent.empty()) {
            throw Error(ErrorKind::InvalidInput, "fetch limits must be strictly positive");
        }
    }
};

struct PageContent {
    Bytes body;
    int status = 0;
    std::chrono::system_clock::time_point fetched_at;
    NormalizedUrl final_url;
};

namespace fetch_detail {

inline bool is_redirect(int status) {
    return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

inline void resolve_host(const NormalizedUrl& url) {
    std::string host = url.host;
    if (host.size() > 2 && host.front() == '[') host = host.substr(1, host.size() - 2);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res);
    if (rc != 0) {
        throw Error(ErrorKind::NameResolution, "cannot resolve '" + host + "': " + ::gai_strerror(rc));
    }
    ::freeaddrinfo(res);
}

// RFC 3986 section 5.2.4, applied to the path part only.
inline std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t pos = 1;
    while (pos <= path.size()) {
        const auto next = std::min(path.find('/', pos), path.size());
        const auto seg = path.substr(pos, next - pos);
        if (seg == "..") {
            if (!out.empty()) out.pop_back();
        } else if (seg != ".") {
            out.push_back(seg);
        }
        if (next == path.size() && (seg == "." || seg == "..")) out.emplace_back();
        pos = next + 1;
    }
    std::string result;
    for (const auto seg : out) {
        result += '/';
        result += seg;
    }
    return result.empty() ? "/" : result;
}

/// Resolve a Location header against the URL that produced it.
inline NormalizedUrl resolve_location(const NormalizedUrl& base, const std::string& location) {
    if (location.find("://") != std::string::npos) return normalize_url(location);
    if (location.rfind("//", 0) == 0) return normalize_url(base.scheme + ":" + location);
    const auto q = location.find('?');
    std::string path = location.substr(0, q);
    const std::string query = q == std::string::npos ? "" : location.substr(q);
    if (path.empty() || path.front() != '/') path = base.path.substr(0, base.path.rfind('/') + 1) + path;
    return normalize_url(base.origin() + remove_dot_segments(path) + query);
}

} // namespace fetch_detail

/// GET `url`, following up to cfg.max_redirects redirects. Oversized bodies
/// are rejected, never clipped.
inline PageContent fetch(const NormalizedUrl& url, const FetchConfig& cfg = {}) {
    using clock = std::chrono::steady_clock;
    cfg.validate();

    NormalizedUrl current = url;
    std::set<std::string> visited;
    const auto deadline = clock::now() + cfg.timeout;

    for (unsigned hop = 0;; ++hop) {
        if (!visited.insert(current.str()).second) {
            throw Error(ErrorKind::TooManyRedirects, "redirect loop at " + current.str());
        }
        if (current.scheme == "https") {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
            throw Error(ErrorKind::UnsupportedScheme, "built without TLS support");
#endif
        }
        fetch_detail::resolve_host(current);

        httplib::Client client(current.origin());
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
        if (remaining.count() <= 0) throw Error(ErrorKind::Timeout, "deadline exceeded before " + current.str());
        client.set_connection_timeout(remaining);
        client.set_read_timeout(remaining);
        client.set_write_timeout(remaining);
        client.set_follow_location(false);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        client.enable_server_certificate_verification(cfg.verify_tls);
#endif

        Bytes body;
        int status = 0;
        std::string location;
        bool too_large = false;
        bool timed_out = false;

        const httplib::Headers headers = {{"User-Agent", cfg.user_agent}, {"Accept", "*/*"}};
        auto on_response = [&](const httplib::Response& res) {
            status = res.status;
            if (fetch_detail::is_redirect(status)) {
                location = res.get_header_value("Location");
                return false;
            }
            if (status >= 400) return false;
            if (res.has_header("Content-Length")) {
                const auto declared = std::strtoull(res.get_header_value("Content-Length").c_str(), nullptr, 10);
                if (declared > cfg.max_body_bytes) {
                    too_large = true;
                    return false;
                }
            }
            return true;
        };
        auto on_data = [&](const char* data, std::size_t len) {
            if (body.size() + len > cfg.max_body_bytes) {
                too_large = true;
                return false;
            }
            if (clock::now() > deadline) {
                timed_out = true;
                return false;
            }
            body.insert(body.end(), data, data + len);
            return true;
        };
        const auto result = client.Get(current.path_and_query(), headers, on_response, on_data);

        if (too_large) {
            throw Error(ErrorKind::BodyTooLarge, "body of " + current.str() + " exceeds " + std::to_string(cfg.max_body_bytes) + " bytes");
        }
        if (timed_out) throw Error(ErrorKind::Timeout, "timed out reading " + current.str());
        if (fetch_detail::is_redirect(status)) {
            if (location.empty()) {
                throw Error(ErrorKind::HttpStatus, "redirect without Location from " + current.str(), status);
            }
            if (hop + 1 > cfg.max_redirects) {
                throw Error(ErrorKind::TooManyRedirects, "more than " + std::to_string(cfg.max_redirects) + " redirects");
            }
            current = fetch_detail::resolve_location(current, location);
            continue;
        }
        if (status >= 400 || (status != 0 && (status < 200 || status > 299))) {
            throw Error(ErrorKind::HttpStatus, "HTTP " + std::to_string(status) + " from " + current.str(), status);
        }
        if (!result) {
            const auto err = result.error();
            if (err == httplib::Error::ConnectionTimeout || clock::now() + std::chrono::milliseconds(50) >= deadline) {
                throw Error(ErrorKind::Timeout, "timed out fetching " + current.str());
            }
            throw Error(ErrorKind::Connection, "fetching " + current.str() + ": " + httplib::to_string(err));
        }
        return PageContent{std::move(body), status, std::chrono::system_clock::now(), current};
    }
}

} // namespace phishvis
