#include "donorchain/network/policy.hpp"

#include <cctype>
#include <charconv>

#include "donorchain/common/error.hpp"

namespace donorchain::network {

PolicyExpr PolicyExpr::org(std::string org_id) {
  PolicyExpr p;
  p.kind_ = Kind::Org;
  p.org_ = std::move(org_id);
  return p;
}

PolicyExpr PolicyExpr::submitter() {
  PolicyExpr p;
  p.kind_ = Kind::Submitter;
  return p;
}

PolicyExpr PolicyExpr::all_of(std::vector<PolicyExpr> children) {
  PolicyExpr p;
  p.kind_ = Kind::And;
  p.k_ = children.size();
  p.children_ = std::move(children);
  return p;
}

PolicyExpr PolicyExpr::any_of(std::vector<PolicyExpr> children) {
  PolicyExpr p;
  p.kind_ = Kind::Or;
  p.k_ = 1;
  p.children_ = std::move(children);
  return p;
}

PolicyExpr PolicyExpr::out_of(std::size_t k, std::vector<PolicyExpr> children) {
  if (k == 0 || k > children.size()) {
    throw Error(Errc::PolicyParse, "outof threshold " + std::to_string(k) + " with " +
                                       std::to_string(children.size()) + " operands");
  }
  PolicyExpr p;
  p.kind_ = Kind::OutOf;
  p.k_ = k;
  p.children_ = std::move(children);
  return p;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PolicyExpr parse_all() {
    auto expr = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return expr;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::PolicyParse, what + " at offset " + std::to_string(pos_) + " in '" +
                                       std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string atom() {
    skip_space();
    auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  PolicyExpr parse_expr() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (text_[pos_] != '(') {
      auto name = atom();
      if (name == "submitter") return PolicyExpr::submitter();
      return PolicyExpr::org(std::move(name));
    }
    ++pos_;
    auto op = atom();
    std::size_t k = 0;
    if (op == "outof") {
      auto n = atom();
      auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), k);
      if (ec != std::errc() || ptr != n.data() + n.size()) fail("outof needs a number");
    }
    std::vector<PolicyExpr> children;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) fail("unclosed '('");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      children.push_back(parse_expr());
    }
    if (op == "submitter") {
      if (!children.empty()) fail("submitter takes no operands");
      return PolicyExpr::submitter();
    }
    if (children.empty()) fail("'" + op + "' needs operands");
    if (op == "and") return PolicyExpr::all_of(std::move(children));
    if (op == "or") return PolicyExpr::any_of(std::move(children));
    if (op == "outof") return PolicyExpr::out_of(k, std::move(children));
    fail("unknown operator '" + op + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PolicyExpr PolicyExpr::parse(std::string_view text) { return Parser(text).parse_all(); }

std::string PolicyExpr::to_string() const {
  switch (kind_) {
    case Kind::Org: return org_;
    case Kind::Submitter: return "(submitter)";
    default: break;
  }
  std::string out = kind_ == Kind::And ? "(and" : kind_ == Kind::Or ? "(or" : "(outof " + std::to_string(k_);
  for (const auto& c : children_) out += " " + c.to_string();
  return out + ")";
}

bool PolicyExpr::evaluate(const std::set<std::string>& endorsing_orgs, const std::string& submitter_org) const {
  switch (kind_) {
    case Kind::Org: return endorsing_orgs.contains(org_);
    case Kind::Submitter: return endorsing_orgs.contains(submitter_org);
    default: break;
  }
  std::size_t satisfied = 0;
  for (const auto& c : children_) satisfied += c.evaluate(endorsing_orgs, submitter_org) ? 1 : 0;
  return satisfied >= k_;
}

std::set<std::string> PolicyExpr::referenced_orgs() const {
  std::set<std::string> out;
  if (kind_ == Kind::Org) out.insert(org_);
  for (const auto& c : children_) out.merge(c.referenced_orgs());
  return out;
}

bool PolicyExpr::references_submitter() const {
  if (kind_ == Kind::Submitter) return true;
  for (const auto& c : children_) {
    if (c.references_submitter()) return true;
  }
  return false;
}

std::set<std::string> PolicyExpr::choose_endorsers(const std::string& submitter_org) const {
  switch (kind_) {
    case Kind::Org: return {org_};
    case Kind::Submitter: return {submitter_org};
    default: break;
  }
  std::set<std::string> out;
  for (std::size_t i = 0; i < k_; ++i) out.merge(children_[i].choose_endorsers(submitter_org));
  return out;
}

}  // namespace donorchain::network
