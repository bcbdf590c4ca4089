#ifndef CHROMOSCALE_SERVER_HPP
#define CHROMOSCALE_SERVER_HPP

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "chromoscale/session.hpp"

namespace chromoscale {

inline constexpr unsigned short kDefaultPort = 9800;

namespace net_detail {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct Outgoing {
    bool binary = false;
    std::string data;
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, std::shared_ptr<const GenomeDataset> ds, const EngineConfig& cfg,
               std::function<void()> on_close)
        : ws_(std::move(socket)), ds_(std::move(ds)), cfg_(cfg), on_close_(std::move(on_close)) {}

    ~Connection() {
        if (on_close_) on_close_();
    }

    void start() {
        asio::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->do_accept(); });
    }

    /// Closes the socket from any thread; pending operations finish with an error.
    void shutdown() {
        asio::post(ws_.get_executor(), [self = shared_from_this()] {
            beast::error_code ec;
            beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
            beast::get_lowest_layer(self->ws_).close();
        });
    }

private:
    void do_accept() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(1 << 20);
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            try {
                self->session_ = std::make_unique<Session>(self->ds_, self->cfg_);
            } catch (const std::exception&) {
                return;
            }
            self->queue_.push_back({false, self->session_->session_info().dump()});
            self->do_write();
        });
    }

    void do_read() {
        buffer_.consume(buffer_.size());
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;  // closed, reset or shut down: the session is discarded
            std::vector<Event> events;
            if (self->ws_.got_binary()) {
                events.push_back(Event{{{"type", "error"},
                                        {"code", "malformed"},
                                        {"message", "commands must be JSON text frames"}},
                                       {}});
            } else {
                events = self->session_->handle(beast::buffers_to_string(self->buffer_.data()));
            }
            for (auto& ev : events) {
                self->queue_.push_back({false, ev.message.dump()});
                if (ev.has_binary()) self->queue_.push_back({true, std::string(ev.binary.begin(), ev.binary.end())});
            }
            self->do_write();
        });
    }

    void do_write() {
        if (queue_.empty()) {
            do_read();
            return;
        }
        ws_.binary(queue_.front().binary);
        ws_.async_write(asio::buffer(queue_.front().data), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->queue_.pop_front();
            self->do_write();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<const GenomeDataset> ds_;
    const EngineConfig& cfg_;
    std::function<void()> on_close_;
    std::unique_ptr<Session> session_;
    beast::flat_buffer buffer_;
    std::deque<Outgoing> queue_;
};

}  // namespace net_detail

/// WebSocket front end: one Session per connection, dataset shared read-only.
class Server {
public:
    Server(std::shared_ptr<const GenomeDataset> dataset, EngineConfig config, unsigned short port = kDefaultPort,
           const std::string& address = "127.0.0.1")
        : ds_(std::move(dataset)), cfg_(std::move(config)), acceptor_(ioc_), signals_(ioc_) {
        cfg_.check();
        namespace asio = boost::asio;
        const asio::ip::tcp::endpoint ep{asio::ip::make_address(address), port};
        acceptor_.open(ep.protocol());
        acceptor_.set_option(asio::socket_base::reuse_address(true));
        acceptor_.bind(ep);
        acceptor_.listen(asio::socket_base::max_listen_connections);
        port_ = acceptor_.local_endpoint().port();
    }

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const noexcept { return port_; }
    std::size_t active_connections() const noexcept { return active_.load(); }

    /// Serves until stop() (or SIGINT/SIGTERM when handle_signals) on `threads` workers.
    void run(unsigned threads = 0, bool handle_signals = false) {
        if (threads == 0) threads = std::max(1U, std::min(8U, std::thread::hardware_concurrency()));
        if (handle_signals) {
            signals_.add(SIGINT);
            signals_.add(SIGTERM);
            signals_.async_wait([this](const boost::system::error_code& ec, int) {
                if (!ec) stop();
            });
        }
        do_accept();
        std::vector<std::thread> workers;
        for (unsigned i = 1; i < threads; ++i) workers.emplace_back([this] { ioc_.run(); });
        ioc_.run();
        for (auto& w : workers) w.join();
    }

    /// Stops accepting and closes every live connection; run() returns once they have
    /// unwound. Thread-safe.
    void stop() {
        boost::asio::post(ioc_, [this] {
            boost::system::error_code ec;
            acceptor_.close(ec);
            stopping_ = true;
            std::lock_guard lock(mutex_);
            for (auto& weak : connections_) {
                if (auto c = weak.lock()) c->shutdown();
            }
            connections_.clear();
            signals_.cancel(ec);
        });
    }

private:
    void do_accept() {
        acceptor_.async_accept(boost::asio::make_strand(ioc_), [this](boost::system::error_code ec,
                                                                       boost::asio::ip::tcp::socket socket) {
            if (ec || stopping_) return;
            ++active_;
            auto conn = std::make_shared<net_detail::Connection>(std::move(socket), ds_, cfg_, [this] { --active_; });
            {
                std::lock_guard lock(mutex_);
                std::erase_if(connections_, [](const auto& w) { return w.expired(); });
                connections_.push_back(conn);
            }
            conn->start();
            do_accept();
        });
    }

    // Declared before ioc_ so handlers destroyed with it can still reach them.
    std::shared_ptr<const GenomeDataset> ds_;
    EngineConfig cfg_;
    std::atomic<bool> stopping_{false};
    std::atomic<std::size_t> active_{0};
    std::mutex mutex_;
    std::vector<std::weak_ptr<net_detail::Connection>> connections_;
    boost::asio::io_context ioc_;
    boost::asio::ip::tcp::acceptor acceptor_;
    boost::asio::signal_set signals_;
    unsigned short port_ = 0;
};

}  // namespace chromoscale

#endif  // CHROMOSCALE_SERVER_HPP
