#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowgate::util {

// Thin RAII wrappers over POSIX TCP sockets. Blocking I/O with optional
// receive timeouts; everything above this speaks whole PDUs or MLLP frames.
class tcp_socket {
public:
    tcp_socket() = default;
    explicit tcp_socket(int fd) : fd_(fd) {}
    tcp_socket(tcp_socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    tcp_socket& operator=(tcp_socket&& other) noexcept;
    tcp_socket(const tcp_socket&) = delete;
    tcp_socket& operator=(const tcp_socket&) = delete;
    ~tcp_socket();

    // Throws errc::connection_refused on failure to connect.
    static tcp_socket connect(const std::string& host, uint16_t port);

    bool valid() const noexcept { return fd_ >= 0; }

    void set_receive_timeout(std::chrono::milliseconds timeout);

    // Sends the whole span; throws errc::protocol_error on short writes.
    void send_all(std::span<const uint8_t> data);

    // Reads exactly n bytes. Returns false on clean EOF at a message
    // boundary (nothing read); throws errc::timeout / errc::protocol_error
    // otherwise.
    bool recv_exact(std::span<uint8_t> out);

    // Reads up to out.size() bytes; returns bytes read, 0 on EOF.
    size_t recv_some(std::span<uint8_t> out);

    std::string peer_address() const;

    void shutdown_send();
    void shutdown_rw();
    void close();

private:
    int fd_ = -1;
};

class tcp_listener {
public:
    tcp_listener() = default;
    tcp_listener(tcp_listener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
        other.fd_ = -1;
    }
    tcp_listener& operator=(tcp_listener&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.fd_;
            port_ = other.port_;
            other.fd_ = -1;
        }
        return *this;
    }
    tcp_listener(const tcp_listener&) = delete;
    tcp_listener& operator=(const tcp_listener&) = delete;
    ~tcp_listener();

    // Binds 0.0.0.0:port (port 0 picks a free one). Throws errc::bind_failed.
    static tcp_listener bind(uint16_t port);

    uint16_t port() const noexcept { return port_; }

    // Blocks until a connection arrives or the listener is closed from
    // another thread; nullopt on close/shutdown.
    std::optional<tcp_socket> accept();

    void close();

private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

}  // namespace flowgate::util
