#ifndef QEDOEP__REALSPACE__FIELD_IO
#define QEDOEP__REALSPACE__FIELD_IO

#include <qedoep/realspace/field.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace qedoep {

// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
	char buffer[64];
	auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
	if(ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
	return std::string(buffer, ptr);
}

inline double parse_double(std::string_view text) {
	while(!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
	while(!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
	if(!text.empty() && text.front() == '+') text.remove_prefix(1);
	double value = 0.0;
	auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
	if(ec != std::errc() || ptr != text.data() + text.size()) {
		throw std::invalid_argument("cannot parse number '" + std::string(text) + "'");
	}
	return value;
}

struct field_dump {
	field values;
	std::string units;
};

// Optional leading '#' comment lines, then the header "ndim=2 points=127,127 spacing=0.7052,0.7052 units=nm", then one
// value per line in flat index order.
inline void write_field(std::ostream & out, field const & f, std::string const & units) {
	auto const & mesh = f.mesh();
	out << "ndim=" << mesh.ndim() << " points=" << mesh.points(0);
	if(mesh.ndim() == 2) out << ',' << mesh.points(1);
	out << " spacing=" << format_double(mesh.spacing(0));
	if(mesh.ndim() == 2) out << ',' << format_double(mesh.spacing(1));
	out << " units=" << (units.empty() ? "none" : units) << '\n';
	for(auto value : f) out << format_double(value) << '\n';
}

inline field_dump read_field(std::istream & in) {
	std::string header;
	do {
		if(!std::getline(in, header)) throw std::runtime_error("read_field: missing header");
	} while(!header.empty() && header[0] == '#');

	int ndim = 0;
	std::array<int, 2> points{1, 1};
	std::array<double, 2> spacing{1.0, 1.0};
	std::string units;

	std::istringstream tokens(header);
	std::string token;
	while(tokens >> token) {
		auto eq = token.find('=');
		if(eq == std::string::npos) throw std::runtime_error("read_field: malformed header token '" + token + "'");
		auto key = token.substr(0, eq);
		auto value = token.substr(eq + 1);
		auto comma = value.find(',');
		if(key == "ndim") {
			ndim = std::stoi(value);
		} else if(key == "points") {
			points[0] = std::stoi(value.substr(0, comma));
			if(comma != std::string::npos) points[1] = std::stoi(value.substr(comma + 1));
		} else if(key == "spacing") {
			spacing[0] = parse_double(value.substr(0, comma));
			if(comma != std::string::npos) spacing[1] = parse_double(value.substr(comma + 1));
		} else if(key == "units") {
			units = value;
		} else {
			throw std::runtime_error("read_field: unknown header key '" + key + "'");
		}
	}

	grid mesh(ndim, points, spacing);
	field values(mesh);
	std::string line;
	for(std::size_t ip = 0; ip < mesh.size(); ip++) {
		if(!std::getline(in, line)) throw std::runtime_error("read_field: expected " + std::to_string(mesh.size()) + " values");
		values[ip] = parse_double(line);
	}
	return {std::move(values), units};
}

inline void save_field(std::string const & path, field const & f, std::string const & units) {
	std::ofstream out(path);
	if(!out) throw std::runtime_error("cannot write '" + path + "'");
	write_field(out, f, units);
}

inline field_dump load_field(std::string const & path) {
	std::ifstream in(path);
	if(!in) throw std::runtime_error("cannot read '" + path + "'");
	return read_field(in);
}

}

#endif
