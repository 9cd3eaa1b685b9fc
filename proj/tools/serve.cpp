#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "cli_support.hpp"

namespace cli {

namespace {

void Dispatch(const repro_service* service, const httplib::Request& req, httplib::Response& res) {
  const std::string& target = req.path;
  int status = 500;
  char* type = nullptr;
  char* body = nullptr;
  std::size_t len = 0;
  const auto rc = repro_service_handle(service, req.method.c_str(), target.c_str(),
                                       req.body.data(), req.body.size(), &status, &type, &body,
                                       &len);
  if (rc != REPRO_OK) {
    res.status = 500;
    res.set_content(std::string("{\"code\":\"internal\",\"message\":\"") + repro_status_name(rc) +
                        "\"}",
                    "application/json");
    return;
  }
  res.status = status;
  res.set_content(std::string(body, len), type ? type : "application/json");
  repro_free_string(type);
  repro_free_string(body);
}

}  // namespace

int RunServer(const repro_service* service, const ServeOptions& options) {
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  httplib::Server server;
  server.new_task_queue = [n = options.threads] { return new httplib::ThreadPool(n); };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler = [service](const httplib::Request& req, httplib::Response& res) {
    Dispatch(service, req, res);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Options(".*", handler);

  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.host);
  } else if (!server.bind_to_port(options.host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "error: cannot bind " << options.host << ":" << options.port << "\n";
    return 1;
  }

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    signalled = true;
    server.stop();
  });
  std::cout << "listening on http://" << options.host << ":" << port << std::endl;
  const bool ok = server.listen_after_bind();
  // Wake the waiter if the server stopped for another reason.
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return ok ? 0 : 1;
}

}  // namespace cli
