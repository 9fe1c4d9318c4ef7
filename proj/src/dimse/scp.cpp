#include "flowgate/dimse/scp.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "flowgate/dicom/codec.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"
#include "flowgate/util/net.hpp"

namespace flowgate::dimse {

struct store_scp::impl {
    scp_listen_config config;
    store_handler handler;
    util::tcp_listener listener;
    std::thread accept_thread;
    std::mutex mutex;
    std::vector<std::thread> association_threads;
    std::vector<std::shared_ptr<util::tcp_socket>> open_sockets;
    std::atomic<bool> stopping {false};

    void serve_association(std::shared_ptr<util::tcp_socket> sock);
    void run_accept_loop();
    void shut_down();
};

namespace {

void send_abort(util::tcp_socket& sock, uint8_t source, uint8_t reason) {
    try {
        a_abort ab;
        ab.source = source;
        ab.reason = reason;
        write_pdu(sock, ab);
    } catch (const error&) {
        // socket already gone; nothing left to do
    }
}

}  // namespace

void store_scp::impl::serve_association(std::shared_ptr<util::tcp_socket> sock) {
    try {
        sock->set_receive_timeout(config.idle_timeout);

        auto first = read_pdu(*sock);
        if (!first) return;
        auto* rq = std::get_if<associate_rq>(&*first);
        if (rq == nullptr) {
            send_abort(*sock, 2, 1);
            return;
        }

        auto outcome = negotiate_accept(*rq, config.policy);
        if (auto* rj = std::get_if<associate_rj>(&outcome)) {
            write_pdu(*sock, *rj);
            return;
        }
        auto& ac = std::get<associate_ac>(outcome);
        write_pdu(*sock, ac);

        std::map<uint8_t, std::string> accepted_ts;
        for (const auto& c : ac.contexts) {
            if (c.accepted()) accepted_ts[c.id] = c.transfer_syntax;
        }

        scp_context ctx;
        ctx.calling = rq->calling;
        ctx.called = rq->called;
        ctx.peer_address = sock->peer_address();

        uint32_t peer_max = rq->max_pdu_length;
        if (peer_max == 0) peer_max = 1024 * 1024;
        peer_max = std::min(peer_max, 1024u * 1024u);

        util::byte_buffer command_buf;
        util::byte_buffer data_buf;
        dimse_command current;
        bool command_complete = false;
        uint8_t active_context = 0;

        while (!stopping.load()) {
            std::optional<pdu> next;
            try {
                next = read_pdu(*sock);
            } catch (const error& e) {
                if (e.kind() == errc::timeout) {
                    send_abort(*sock, 2, 0);  // idle association reaped
                    return;
                }
                throw;
            }
            if (!next) return;

            if (std::holds_alternative<release_rq>(*next)) {
                write_pdu(*sock, release_rp {});
                return;
            }
            if (std::holds_alternative<a_abort>(*next)) return;
            auto* data = std::get_if<p_data_tf>(&*next);
            if (data == nullptr) {
                send_abort(*sock, 2, 2);  // unexpected PDU
                return;
            }

            for (const auto& v : data->values) {
                if (v.command) {
                    active_context = v.context_id;
                    command_buf.insert(command_buf.end(), v.data.begin(), v.data.end());
                    if (!v.last) continue;
                    current = parse_command(command_buf);
                    command_buf.clear();
                    command_complete = true;

                    if (current.command_field == command::c_echo_rq) {
                        p_data_tf rsp;
                        rsp.values = fragment(active_context, true,
                                              serialize_command(build_c_echo_rsp(current)),
                                              peer_max);
                        write_pdu(*sock, rsp);
                        command_complete = false;
                    } else if (current.command_field != command::c_store_rq) {
                        send_abort(*sock, 2, 2);
                        return;
                    }
                    continue;
                }

                if (!command_complete) {
                    send_abort(*sock, 2, 2);  // data before command
                    return;
                }
                data_buf.insert(data_buf.end(), v.data.begin(), v.data.end());
                if (!v.last) continue;

                auto ts_it = accepted_ts.find(v.context_id);
                if (ts_it == accepted_ts.end()) {
                    send_abort(*sock, 2, 2);
                    return;
                }
                ctx.transfer_syntax = ts_it->second;

                uint16_t store_status;
                try {
                    dicom::dicom_file file;
                    file.file_meta = dicom::make_file_meta(current.sop_class_uid,
                                                           current.sop_instance_uid,
                                                           ctx.transfer_syntax);
                    file.transfer_syntax = ctx.transfer_syntax;
                    file.dataset = dicom::parse_dataset(data_buf, ctx.transfer_syntax);
                    store_status = handler(ctx, std::move(file));
                } catch (...) {
                    store_status = status::cannot_understand;
                }
                data_buf.clear();
                command_complete = false;

                p_data_tf rsp;
                rsp.values = fragment(v.context_id, true,
                                      serialize_command(build_c_store_rsp(current, store_status)),
                                      peer_max);
                write_pdu(*sock, rsp);
            }
        }
    } catch (const error&) {
        send_abort(*sock, 2, 0);
    } catch (const std::exception&) {
        send_abort(*sock, 2, 0);
    }
}

void store_scp::impl::run_accept_loop() {
    while (!stopping.load()) {
        auto accepted = listener.accept();
        if (!accepted) return;
        auto sock = std::make_shared<util::tcp_socket>(std::move(*accepted));
        std::lock_guard<std::mutex> lock(mutex);
        if (stopping.load()) return;
        open_sockets.push_back(sock);
        association_threads.emplace_back([this, sock] { serve_association(sock); });
    }
}

void store_scp::impl::shut_down() {
    if (stopping.exchange(true)) return;
    listener.close();
    {
        std::lock_guard<std::mutex> lock(mutex);
        for (auto& s : open_sockets) s->shutdown_rw();
    }
    if (accept_thread.joinable()) accept_thread.join();
    std::vector<std::thread> threads;
    {
        std::lock_guard<std::mutex> lock(mutex);
        threads.swap(association_threads);
    }
    for (auto& t : threads) {
        if (t.joinable()) t.join();
    }
}

store_scp::store_scp(const scp_listen_config& config, store_handler handler)
    : impl_(std::make_shared<impl>()) {
    impl_->config = config;
    impl_->handler = std::move(handler);
    impl_->listener = util::tcp_listener::bind(config.port);
    impl_->accept_thread = std::thread([impl = impl_] { impl->run_accept_loop(); });
}

store_scp::~store_scp() {
    if (impl_) impl_->shut_down();
}

uint16_t store_scp::port() const { return impl_->listener.port(); }

void store_scp::stop() { impl_->shut_down(); }

}  // namespace flowgate::dimse
