#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace gcsim::csv {

// RFC 4180 reader: handles quoted fields, embedded separators, quotes and
// newlines. Records separated by \n or \r\n.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input. Empty lines yield a single empty field.
  bool read_record(std::vector<std::string>* fields);
  size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  size_t line_ = 0;
};

std::string escape(const std::string& field);
void write_record(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace gcsim::csv
