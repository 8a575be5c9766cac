#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <functional>
#include <mutex>
#include <thread>

#include "autocompose/itemset.hpp"

namespace autocompose {

constexpr int kProtocolVersion = 1;

struct RemoteRequest {
    int protocol_version = kProtocolVersion;
    std::string service_id;
    Itemset items;

    bool operator==(const RemoteRequest&) const = default;
};

struct RemoteResponse {
    enum class Status { Ok, Error };
    Status status = Status::Ok;
    long long total_cost = 0;   // meaningful iff Ok
    std::string message;        // meaningful iff Error

    static RemoteResponse ok(long long cost) { return {Status::Ok, cost, ""}; }
    static RemoteResponse error(std::string msg) { return {Status::Error, 0, std::move(msg)}; }

    bool operator==(const RemoteResponse&) const = default;
};

inline std::string encode_request(const RemoteRequest& r) {
    if (r.protocol_version != kProtocolVersion)
        throw ProtocolError("unsupported protocol version");
    if (r.items.empty()) throw ProtocolError("request items must be non-empty");
    if (r.service_id.empty() || r.service_id.find(' ') != std::string::npos ||
        r.service_id.find('\n') != std::string::npos)
        throw ProtocolError("bad service id");
    return "AC" + std::to_string(r.protocol_version) + " REQ " + r.service_id + " " +
           r.items.to_string() + "\n";
}

namespace detail {

// Consumes the expected token plus one trailing space; offset tracks bytes.
inline std::string take_token(const std::string& line, std::size_t& offset, char stop) {
    std::size_t end = line.find(stop, offset);
    if (end == std::string::npos) throw ProtocolError("truncated message", offset);
    std::string tok = line.substr(offset, end - offset);
    offset = end + 1;
    return tok;
}

inline int parse_version(const std::string& line, std::size_t& offset) {
    if (line.size() < 2 || line.compare(0, 2, "AC") != 0)
        throw ProtocolError("missing AC magic", 0);
    offset = 2;
    std::string ver = take_token(line, offset, ' ');
    if (ver.empty() || ver.find_first_not_of("0123456789") != std::string::npos)
        throw ProtocolError("bad version field", 2);
    int v = 0;
    try {
        v = std::stoi(ver);
    } catch (const std::exception&) {
        throw ProtocolError("bad version field", 2);
    }
    if (v != kProtocolVersion) throw ProtocolError("unsupported version " + ver, 2);
    return v;
}

inline std::string strip_newline(const std::string& data) {
    if (data.empty() || data.back() != '\n')
        throw ProtocolError("message not newline-terminated", data.size());
    std::string line = data.substr(0, data.size() - 1);
    if (line.find('\n') != std::string::npos)
        throw ProtocolError("embedded newline", line.find('\n'));
    return line;
}

}  // namespace detail

inline RemoteRequest decode_request(const std::string& data) {
    std::string line = detail::strip_newline(data);
    std::size_t offset = 0;
    RemoteRequest r;
    r.protocol_version = detail::parse_version(line, offset);
    std::string verb = detail::take_token(line, offset, ' ');
    if (verb != "REQ") throw ProtocolError("expected REQ, got '" + verb + "'", offset);
    r.service_id = detail::take_token(line, offset, ' ');
    if (r.service_id.empty()) throw ProtocolError("empty service id", offset);
    std::string items = line.substr(offset);
    if (items.empty()) throw ProtocolError("missing items field", offset);
    try {
        r.items = parse_itemset_csv(items);
    } catch (const std::exception& e) {
        throw ProtocolError(std::string("bad items field: ") + e.what(), offset);
    }
    if (r.items.empty()) throw ProtocolError("empty itemset", offset);
    return r;
}

inline std::string encode_response(const RemoteResponse& r) {
    if (r.status == RemoteResponse::Status::Ok)
        return "AC" + std::to_string(kProtocolVersion) + " OK " + std::to_string(r.total_cost) +
               "\n";
    if (r.message.find('\n') != std::string::npos)
        throw ProtocolError("error message may not contain newlines");
    return "AC" + std::to_string(kProtocolVersion) + " ERR " + r.message + "\n";
}

inline RemoteResponse decode_response(const std::string& data) {
    std::string line = detail::strip_newline(data);
    std::size_t offset = 0;
    detail::parse_version(line, offset);
    std::string verb = detail::take_token(line, offset, ' ');
    if (verb == "OK") {
        std::string cost = line.substr(offset);
        if (cost.empty() ||
            cost.find_first_not_of("0123456789", cost[0] == '-' ? 1 : 0) != std::string::npos)
            throw ProtocolError("bad cost field '" + cost + "'", offset);
        try {
            return RemoteResponse::ok(std::stoll(cost));
        } catch (const std::exception&) {
            throw ProtocolError("cost out of range", offset);
        }
    }
    if (verb == "ERR") return RemoteResponse::error(line.substr(offset));
    throw ProtocolError("expected OK or ERR, got '" + verb + "'", offset);
}

using PeerHandler = std::function<RemoteResponse(const RemoteRequest&)>;

namespace detail {

inline PeerHandler& loopback_handler() {
    static PeerHandler handler;
    return handler;
}

inline std::mutex& loopback_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

// Line-oriented request/response server. endpoint "loopback" installs an
// in-process handler; "host:port" binds a TCP listener.
class PeerServer {
public:
    PeerServer() = default;
    ~PeerServer() { stop(); }

    PeerServer(const PeerServer&) = delete;
    PeerServer& operator=(const PeerServer&) = delete;

    void start(const std::string& endpoint, PeerHandler handler) {
        if (running_) throw TransportError("server already running");
        if (endpoint == "loopback") {
            std::lock_guard lock(detail::loopback_mutex());
            detail::loopback_handler() = std::move(handler);
            loopback_ = true;
            running_ = true;
            return;
        }
        auto [host, port] = split_endpoint(endpoint);
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw TransportError("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(port));
        addr.sin_addr.s_addr = host == "0.0.0.0" ? INADDR_ANY : ::inet_addr(host.c_str());
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(listen_fd_);
            listen_fd_ = -1;
            throw TransportError("cannot bind " + endpoint);
        }
        if (::listen(listen_fd_, 16) < 0) {
            ::close(listen_fd_);
            listen_fd_ = -1;
            throw TransportError("listen() failed");
        }
        if (port == 0) {
            socklen_t len = sizeof(addr);
            ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        }
        bound_port_ = ntohs(addr.sin_port);
        running_ = true;
        accept_thread_ = std::thread([this, handler = std::move(handler)] {
            accept_loop(handler);
        });
    }

    void stop() {
        if (!running_) return;
        running_ = false;
        if (loopback_) {
            std::lock_guard lock(detail::loopback_mutex());
            detail::loopback_handler() = nullptr;
            loopback_ = false;
            return;
        }
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
        if (accept_thread_.joinable()) accept_thread_.join();
    }

    int port() const { return bound_port_; }

private:
    static std::pair<std::string, int> split_endpoint(const std::string& endpoint) {
        std::size_t colon = endpoint.rfind(':');
        if (colon == std::string::npos)
            throw TransportError("endpoint must be host:port or loopback");
        return {endpoint.substr(0, colon), std::stoi(endpoint.substr(colon + 1))};
    }

    void accept_loop(const PeerHandler& handler) {
        while (running_) {
            int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) break;
            serve_connection(fd, handler);
            ::close(fd);
        }
    }

    // One response line per request line, in order, until EOF.
    static void serve_connection(int fd, const PeerHandler& handler) {
        std::string buffer;
        char chunk[512];
        for (;;) {
            ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t nl;
            while ((nl = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, nl + 1);
                buffer.erase(0, nl + 1);
                RemoteResponse resp;
                try {
                    resp = handler(decode_request(line));
                } catch (const ProtocolError& e) {
                    resp = RemoteResponse::error(e.what());
                } catch (const std::exception& e) {
                    resp = RemoteResponse::error(e.what());
                }
                std::string wire = encode_response(resp);
                if (::send(fd, wire.data(), wire.size(), MSG_NOSIGNAL) < 0) return;
            }
        }
    }

    std::atomic<bool> running_{false};
    bool loopback_ = false;
    int listen_fd_ = -1;
    int bound_port_ = 0;
    std::thread accept_thread_;
};

// Synchronous peer call; timeout covers connect and the response read.
inline RemoteResponse call_peer(const std::string& endpoint, const RemoteRequest& request,
                                int timeout_ms = 2000) {
    if (endpoint == "loopback") {
        PeerHandler handler;
        {
            std::lock_guard lock(detail::loopback_mutex());
            handler = detail::loopback_handler();
        }
        if (!handler) throw TransportError("no loopback server running");
        // Wire round-trip preserved even in-process.
        return decode_response(encode_response(handler(decode_request(encode_request(request)))));
    }
    std::size_t colon = endpoint.rfind(':');
    if (colon == std::string::npos) throw TransportError("bad endpoint: " + endpoint);
    std::string host = endpoint.substr(0, colon);
    int port = std::stoi(endpoint.substr(colon + 1));

    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket() failed");
    timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (host == "localhost") host = "127.0.0.1";
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw TransportError("cannot resolve host: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(fd);
        throw TransportError("connection to " + endpoint + " failed");
    }
    std::string wire = encode_request(request);
    if (::send(fd, wire.data(), wire.size(), MSG_NOSIGNAL) < 0) {
        ::close(fd);
        throw TransportError("send failed");
    }
    std::string buffer;
    char chunk[512];
    while (buffer.find('\n') == std::string::npos) {
        ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) {
            ::close(fd);
            throw TransportError("timeout or connection closed by peer");
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
    ::close(fd);
    return decode_response(buffer.substr(0, buffer.find('\n') + 1));
}

}  // namespace autocompose
