#include "mfgp/composition.hpp"

#include <algorithm>
#include <cctype>

#include "mfgp/errors.hpp"

namespace mfgp {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  // term := FAMILY ('[' term ']')?
  void term(std::vector<KernelFamily>& outer_first) {
    skip_space();
    if (pos_ + 2 > text_.size()) fail("expected kernel family");
    const std::string_view name = text_.substr(pos_, 2);
    if (name != "SE" && name != "SC") fail("expected SE or SC");
    outer_first.push_back(parse_family(name));
    pos_ += 2;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '[') {
      ++pos_;
      term(outer_first);
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != ']') fail("expected ']'");
      ++pos_;
    }
  }

  void finish() {
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("invalid composition '" + std::string(text_) + "' at position " +
                     std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CompositionSpec CompositionSpec::parse(std::string_view text) {
  std::vector<KernelFamily> outer_first;
  Parser parser(text);
  parser.term(outer_first);
  parser.finish();
  if (outer_first.size() < 2 || outer_first.size() > 3) {
    throw InputError("composition '" + std::string(text) + "' has depth " +
                     std::to_string(outer_first.size()) + "; supported depths are 2 and 3");
  }
  std::reverse(outer_first.begin(), outer_first.end());
  return CompositionSpec{std::move(outer_first)};
}

std::string CompositionSpec::to_string() const {
  std::string out;
  for (auto it = families.rbegin(); it != families.rend(); ++it) {
    if (!out.empty()) out += '[';
    out += mfgp::to_string(*it);
  }
  out.append(families.empty() ? 0 : families.size() - 1, ']');
  return out;
}

}  // namespace mfgp
