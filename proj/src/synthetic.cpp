#include "autonode/synthetic.hpp"

#include <algorithm>
#include <array>

#include "autonode/rng.hpp"
#include "autonode/text.hpp"

namespace autonode::synthetic {

namespace {

struct Section {
  const char* name;  // nav label and list page title
  const char* item;
  std::array<const char*, 8> fields;
};

constexpr std::array<Section, 6> kSections{{
    {"Contacts", "Contact", {"Name", "Email", "Phone", "Company", "Title", "City", "Notes", "Website"}},
    {"Deals", "Deal", {"Deal name", "Amount", "Stage", "Owner", "Close date", "Account", "Source", "Priority"}},
    {"Tasks", "Task", {"Summary", "Assignee", "Due date", "Status", "Category", "Effort", "Details", "Reviewer"}},
    {"Tickets", "Ticket", {"Subject", "Requester", "Severity", "Product", "Channel", "Version", "Team", "Tags"}},
    {"Invoices", "Invoice", {"Customer", "Total", "Currency", "Due", "Reference", "Tax rate", "Terms", "Memo"}},
    {"Reports", "Report", {"Report name", "Period", "Metric", "Segment", "Format", "Recipient", "Filter", "Schedule"}},
}};

constexpr std::array<const char*, 16> kValues{"alice",      "bob",     "acme corp", "555 0100", "north",  "q3 review",
                                              "high",       "pending", "usd",       "net 30",   "berlin", "renewal",
                                              "carol@acme", "42",      "weekly",    "priority"};

world::UiElement element(std::string id, world::ElementKind kind, std::string label, world::BBox box) {
  return {std::move(id), kind, std::move(label), box};
}

std::string key(const std::string& s) {
  std::string out;
  for (char c : text::fold(s)) out.push_back(c == ' ' ? '_' : c);
  return out;
}

world::Click center(const world::BBox& b) { return {b.x + b.w / 2, b.y + b.h / 2}; }

struct FormPage {
  std::string id;
  std::vector<world::UiElement> fields;
  world::UiElement save;
};

}  // namespace

Suite generate_suite(const SuiteOptions& options) {
  Suite suite;
  auto& site = suite.site;
  site.screen = {1280, 800};
  site.start_page = "home";

  auto& home = site.pages["home"];
  home.push_back(element("home_title", world::ElementKind::label, "Dashboard", {300, 30, 400, 40}));

  std::vector<world::UiElement> nav;
  std::vector<std::vector<FormPage>> forms(kSections.size());
  std::vector<world::UiElement> back_buttons;
  for (std::size_t s = 0; s < kSections.size(); ++s) {
    const Section& sec = kSections[s];
    const std::string sid = key(sec.name);
    const std::string item = sec.item;

    nav.push_back(element("nav_" + sid, world::ElementKind::button, sec.name, {40, 100 + 70 * static_cast<int>(s), 200, 48}));
    home.push_back(nav.back());
    site.transitions.push_back({"home", nav.back().id, world::ActionKind::click, world::GotoPage{sid}});

    auto& list = site.pages[sid];
    list.push_back(element(sid + "_title", world::ElementKind::label, sec.name, {300, 30, 400, 40}));
    const world::UiElement add = element(sid + "_new", world::ElementKind::button, "New " + item, {300, 120, 160, 48});
    const world::UiElement edit = element(sid + "_edit", world::ElementKind::button, "Edit " + item, {480, 120, 160, 48});
    const world::UiElement import = element(sid + "_import", world::ElementKind::button, "Import", {660, 120, 160, 48});
    const world::UiElement exp = element(sid + "_export", world::ElementKind::button, "Export", {840, 120, 140, 48});
    const world::UiElement home_btn = element(sid + "_home", world::ElementKind::link, "Home", {40, 700, 160, 48});
    for (const auto& e : {add, edit, import, exp, home_btn}) list.push_back(e);
    site.transitions.push_back({sid, import.id, world::ActionKind::click, world::NoOp{}});
    site.transitions.push_back({sid, exp.id, world::ActionKind::click, world::NoOp{}});
    site.transitions.push_back({sid, home_btn.id, world::ActionKind::click, world::GotoPage{"home"}});

    const std::string saved = sid + "_saved";
    auto& done = site.pages[saved];
    done.push_back(element(saved + "_note", world::ElementKind::label, item + " saved", {300, 300, 400, 40}));
    back_buttons.push_back(element(saved + "_back", world::ElementKind::button, "Back to " + std::string(sec.name),
                                   {300, 380, 240, 48}));
    done.push_back(back_buttons.back());
    site.transitions.push_back({saved, back_buttons.back().id, world::ActionKind::click, world::GotoPage{sid}});

    // "new" uses the first six fields, "edit" the last six
    for (int f = 0; f < 2; ++f) {
      FormPage form;
      form.id = sid + (f == 0 ? "_new_form" : "_edit_form");
      auto& page = site.pages[form.id];
      page.push_back(element(form.id + "_heading", world::ElementKind::label, (f == 0 ? "New " : "Edit ") + item,
                             {300, 30, 400, 40}));
      for (int i = 0; i < 6; ++i) {
        const std::string label = sec.fields[static_cast<std::size_t>(i + 2 * f)];
        form.fields.push_back(element(form.id + "_" + key(label), world::ElementKind::textfield, label,
                                      {300, 100 + 70 * i, 500, 44}));
        page.push_back(form.fields.back());
      }
      form.save = element(form.id + "_save", world::ElementKind::button, "Save", {300, 560, 160, 48});
      const auto cancel = element(form.id + "_cancel", world::ElementKind::button, "Cancel", {480, 560, 160, 48});
      page.push_back(form.save);
      page.push_back(cancel);
      site.transitions.push_back({form.id, form.save.id, world::ActionKind::click, world::GotoPage{saved}});
      site.transitions.push_back({form.id, cancel.id, world::ActionKind::click, world::GotoPage{sid}});
      site.transitions.push_back({sid, (f == 0 ? add : edit).id, world::ActionKind::click, world::GotoPage{form.id}});
      forms[s].push_back(std::move(form));
    }
  }

  site.faults.spurious_prob = options.spurious_prob;
  site.faults.text_noise_rate = options.text_noise_rate;
  const std::array<std::pair<const char*, world::ElementKind>, 10> decoys{{
      {"Save", world::ElementKind::button},
      {"Contacts", world::ElementKind::button},
      {"Deals", world::ElementKind::button},
      {"Tasks", world::ElementKind::button},
      {"New Contact", world::ElementKind::button},
      {"New Deal", world::ElementKind::button},
      {"Name", world::ElementKind::textfield},
      {"Email", world::ElementKind::textfield},
      {"Subject", world::ElementKind::textfield},
      {"Amount", world::ElementKind::textfield},
  }};
  for (std::size_t i = 0; i < decoys.size(); ++i) {
    site.faults.spurious_pool.push_back(element("decoy_" + std::to_string(i), decoys[i].second, decoys[i].first,
                                                {1000, 60 + 70 * static_cast<int>(i), 240, 44}));
  }

  Rng rng(derive_seed(options.seed, {0x5e7}));
  for (std::size_t w = 0; w < options.workflows; ++w) {
    const int steps = static_cast<int>(rng.range(3, 15));
    const int back = (steps - 3) % 2;
    const int fields = (steps - 3 - back) / 2;
    const std::size_t s = static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(kSections.size()) - 1));
    const int which = static_cast<int>(rng.range(0, 1));
    const Section& sec = kSections[s];
    const FormPage& form = forms[s][static_cast<std::size_t>(which)];
    const auto& list = site.pages.at(key(sec.name));
    const world::UiElement& opener = list[which == 0 ? 1 : 2];

    std::vector<std::size_t> order{0, 1, 2, 3, 4, 5};
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(i)))]);
    order.resize(static_cast<std::size_t>(fields));

    engine::Workflow wf;
    auto& obj = wf.objective;
    obj.id = "wf" + std::to_string(w);
    obj.expected_steps = steps;
    obj.level = decision::classify_level(steps);
    std::vector<std::string> instr;
    auto click = [&](const world::UiElement& e) {
      wf.demonstration.push_back(center(e.bbox));
      instr.push_back("CLICK :: " + e.text);
    };

    click(nav[s]);
    click(opener);
    std::string filled;
    for (auto f : order) {
      const auto& field = form.fields[f];
      const std::string value = kValues[static_cast<std::size_t>(rng.range(0, kValues.size() - 1))];
      click(field);
      wf.demonstration.push_back(world::TypeText{value});
      instr.push_back("TYPE :: " + value);
      wf.goal.buffers[field.id] = value;
      filled += (filled.empty() ? " with " : ", ") + field.text;
    }
    click(form.save);
    wf.goal.page = key(sec.name) + "_saved";
    if (back) {
      click(back_buttons[s]);
      wf.goal.page = key(sec.name);
    }
    obj.text = text::fold(opener.text) + filled + (back ? " and return to the list" : "");
    obj.instruction_set = std::move(instr);
    suite.workflows.push_back(std::move(wf));
  }
  // the loader runs the full consistency check
  site = world::load_site_model(world::to_json(site));
  return suite;
}

}  // namespace autonode::synthetic
