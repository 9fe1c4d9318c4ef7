#include "flowgate/util/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "flowgate/error.hpp"

namespace flowgate::util {

tcp_socket& tcp_socket::operator=(tcp_socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

tcp_socket::~tcp_socket() { close(); }

tcp_socket tcp_socket::connect(const std::string& host, uint16_t port) {
    addrinfo hints {};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string service = std::to_string(port);
    int rc = getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0) {
        raise(errc::connection_refused, host + ":" + service + " (" + gai_strerror(rc) + ")");
    }
    int fd = -1;
    int last_errno = ECONNREFUSED;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_errno = errno;
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0) {
        raise(errc::connection_refused, host + ":" + service + " (" + strerror(last_errno) + ")");
    }
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return tcp_socket(fd);
}

void tcp_socket::set_receive_timeout(std::chrono::milliseconds timeout) {
    timeval tv {};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void tcp_socket::send_all(std::span<const uint8_t> data) {
    size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            raise(errc::protocol_error, std::string("send failed: ") + strerror(errno));
        }
        sent += static_cast<size_t>(n);
    }
}

bool tcp_socket::recv_exact(std::span<uint8_t> out) {
    size_t got = 0;
    while (got < out.size()) {
        ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            raise(errc::protocol_error, "peer closed mid-message");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) raise(errc::timeout, "receive timed out");
            raise(errc::protocol_error, std::string("recv failed: ") + strerror(errno));
        }
        got += static_cast<size_t>(n);
    }
    return true;
}

size_t tcp_socket::recv_some(std::span<uint8_t> out) {
    while (true) {
        ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
        if (n >= 0) return static_cast<size_t>(n);
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) raise(errc::timeout, "receive timed out");
        raise(errc::protocol_error, std::string("recv failed: ") + strerror(errno));
    }
}

std::string tcp_socket::peer_address() const {
    sockaddr_storage addr {};
    socklen_t len = sizeof(addr);
    if (getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "?";
    char host[NI_MAXHOST];
    char service[NI_MAXSERV];
    if (getnameinfo(reinterpret_cast<sockaddr*>(&addr), len, host, sizeof(host), service,
                    sizeof(service), NI_NUMERICHOST | NI_NUMERICSERV) != 0) {
        return "?";
    }
    return std::string(host) + ":" + service;
}

void tcp_socket::shutdown_send() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void tcp_socket::shutdown_rw() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void tcp_socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

tcp_listener::~tcp_listener() { close(); }

tcp_listener tcp_listener::bind(uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) raise(errc::bind_failed, strerror(errno));
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr {};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int e = errno;
        ::close(fd);
        raise(errc::bind_failed, "port " + std::to_string(port) + ": " + strerror(e));
    }
    if (::listen(fd, 16) != 0) {
        int e = errno;
        ::close(fd);
        raise(errc::bind_failed, std::string("listen: ") + strerror(e));
    }
    socklen_t len = sizeof(addr);
    getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    tcp_listener out;
    out.fd_ = fd;
    out.port_ = ntohs(addr.sin_port);
    return out;
}

std::optional<tcp_socket> tcp_listener::accept() {
    while (true) {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return tcp_socket(fd);
        }
        if (errno == EINTR) continue;
        return std::nullopt;  // listener closed
    }
}

void tcp_listener::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

}  // namespace flowgate::util
