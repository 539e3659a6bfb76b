#include <httplib.h>

#include "autonode/service.hpp"

namespace autonode::service {

void Service::bind(httplib::Server& server) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  };
  server.Get(R"(/api/.*)", forward);
  server.Post(R"(/api/.*)", forward);
}

}  // namespace autonode::service
