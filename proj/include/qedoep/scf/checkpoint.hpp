#ifndef QEDOEP__SCF__CHECKPOINT
#define QEDOEP__SCF__CHECKPOINT

#include <qedoep/realspace/field_io.hpp>
#include <qedoep/scf/ground_state.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

// Layout (plain text, one item per line):
//   qedoep-checkpoint <version>
//   state <iteration> <revision> <stencil_order> <kinetic_coeff> <energy_unit> <length_unit> <n_up> <n_down> <restricted>
//   log <count>, then one line per record: iter e_tot e_x_electron n_modes e_x_photon... max_S density_change charge_error wall
//   field <name> followed by a field dump, for v_ext, v_hartree, density
//   channel <occupancy> <occupied> <lumo> <residual_photon> <residual_electron> <n_energies> energies...
//   list <name> <count> [<inner count>] followed by that many field dumps
// Channel lists: orbitals, v_x_electron, v_x_photon, phi1, phi2, M, Lambda, psi, psi_photon, psi_electron.
inline constexpr int checkpoint_version = 1;

struct checkpoint_data {
	ks_state state;
	std::vector<iteration_record> log;
};

namespace detail {

inline void write_list(std::ostream & out, std::string const & name, std::vector<field> const & fields) {
	out << "list " << name << ' ' << fields.size() << '\n';
	for(auto const & f : fields) write_field(out, f, "");
}

inline std::vector<field> read_list(std::istream & in, std::string const & name) {
	std::string line, tag, got;
	std::size_t count = 0;
	if(!std::getline(in, line)) throw std::runtime_error("checkpoint: missing list " + name);
	std::istringstream ss(line);
	ss >> tag >> got >> count;
	if(tag != "list" || got != name) throw std::runtime_error("checkpoint: expected list " + name + ", found '" + line + "'");
	std::vector<field> fields;
	for(std::size_t k = 0; k < count; k++) fields.push_back(read_field(in).values);
	return fields;
}

inline void write_named(std::ostream & out, std::string const & name, field const & f) {
	out << "field " << name << '\n';
	write_field(out, f, "");
}

inline field read_named(std::istream & in, std::string const & name) {
	std::string line;
	if(!std::getline(in, line) || line != "field " + name) throw std::runtime_error("checkpoint: expected field " + name);
	return read_field(in).values;
}

inline std::vector<field> flatten(std::vector<std::vector<field>> const & nested) {
	std::vector<field> flat;
	for(auto const & row : nested) flat.insert(flat.end(), row.begin(), row.end());
	return flat;
}

inline std::vector<std::vector<field>> unflatten(std::vector<field> flat, std::size_t rows) {
	std::vector<std::vector<field>> nested(rows);
	if(rows == 0) return nested;
	auto cols = flat.size()/rows;
	for(std::size_t r = 0; r < rows; r++) {
		for(std::size_t c = 0; c < cols; c++) nested[r].push_back(std::move(flat[r*cols + c]));
	}
	return nested;
}

}

inline void write_checkpoint(std::ostream & out, ks_state const & st, std::vector<iteration_record> const & log) {
	out << "qedoep-checkpoint " << checkpoint_version << '\n';
	out << "state " << st.iteration << ' ' << st.revision << ' ' << st.stencil_order << ' ' << format_double(st.units.kinetic_coeff) << ' '
	    << st.units.energy_unit << ' ' << st.units.length_unit << ' ' << st.spin.n_up << ' ' << st.spin.n_down << ' ' << int(st.spin.restricted) << '\n';
	out << "log " << log.size() << '\n';
	for(auto const & rec : log) {
		out << rec.iter << ' ' << format_double(rec.e_tot) << ' ' << format_double(rec.e_x_electron) << ' ' << rec.e_x_photon.size();
		for(auto e : rec.e_x_photon) out << ' ' << format_double(e);
		out << ' ' << format_double(rec.max_S) << ' ' << format_double(rec.density_change) << ' ' << format_double(rec.charge_error)
		    << ' ' << format_double(rec.wall) << '\n';
	}
	detail::write_named(out, "v_ext", st.v_ext);
	detail::write_named(out, "v_hartree", st.v_hartree);
	detail::write_named(out, "density", st.density);
	out << "channels " << st.channels.size() << '\n';
	for(auto const & ch : st.channels) {
		out << "channel " << format_double(ch.occupancy) << ' ' << ch.occupied << ' ' << format_double(ch.lumo) << ' '
		    << format_double(ch.residual_photon) << ' ' << format_double(ch.residual_electron) << ' ' << ch.energies.size();
		for(auto e : ch.energies) out << ' ' << format_double(e);
		out << '\n';
		detail::write_list(out, "orbitals", ch.orbitals);
		detail::write_named(out, "v_x_electron", ch.v_x_electron);
		detail::write_named(out, "v_x_photon", ch.v_x_photon);
		out << "shifts " << ch.shifts.revision << ' ' << ch.shifts.phi1.size() << '\n';
		detail::write_list(out, "phi1", detail::flatten(ch.shifts.phi1));
		detail::write_list(out, "phi2", detail::flatten(ch.shifts.phi2));
		detail::write_list(out, "M", ch.shifts.M);
		detail::write_list(out, "Lambda", ch.shifts.Lambda);
		detail::write_list(out, "psi", ch.shifts.psi);
		detail::write_list(out, "psi_photon", ch.psi_photon);
		detail::write_list(out, "psi_electron", ch.psi_electron);
	}
}

inline checkpoint_data read_checkpoint(std::istream & in, std::vector<photon_mode> const & modes) {
	std::string line, tag;
	int version = 0;
	if(!std::getline(in, line)) throw std::runtime_error("checkpoint: empty file");
	{
		std::istringstream ss(line);
		ss >> tag >> version;
		if(tag != "qedoep-checkpoint") throw std::runtime_error("checkpoint: not a checkpoint file");
		if(version != checkpoint_version) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
	}

	int iteration = 0, order = 4, n_up = 0, n_down = 0, restricted = 0;
	std::uint64_t revision = 0;
	std::string kc, eunit, lunit;
	std::getline(in, line);
	{
		std::istringstream ss(line);
		ss >> tag >> iteration >> revision >> order >> kc >> eunit >> lunit >> n_up >> n_down >> restricted;
		if(tag != "state" || !ss) throw std::runtime_error("checkpoint: malformed state line");
	}

	std::vector<iteration_record> log;
	std::size_t nlog = 0;
	std::getline(in, line);
	{
		std::istringstream ss(line);
		ss >> tag >> nlog;
		if(tag != "log") throw std::runtime_error("checkpoint: malformed log line");
	}
	for(std::size_t k = 0; k < nlog; k++) {
		std::getline(in, line);
		std::istringstream ss(line);
		iteration_record rec;
		std::string v;
		std::size_t nm = 0;
		ss >> rec.iter >> v;
		rec.e_tot = parse_double(v);
		ss >> v >> nm;
		rec.e_x_electron = parse_double(v);
		for(std::size_t a = 0; a < nm; a++) {
			ss >> v;
			rec.e_x_photon.push_back(parse_double(v));
		}
		ss >> v; rec.max_S = parse_double(v);
		ss >> v; rec.density_change = parse_double(v);
		ss >> v; rec.charge_error = parse_double(v);
		ss >> v; rec.wall = parse_double(v);
		if(!ss) throw std::runtime_error("checkpoint: malformed log record");
		log.push_back(std::move(rec));
	}

	auto v_ext = detail::read_named(in, "v_ext");
	auto v_h = detail::read_named(in, "v_hartree");
	auto density = detail::read_named(in, "density");
	unit_system units{parse_double(kc), eunit, lunit};
	ks_state st{v_ext.mesh(), units, order, spin_config{n_up, n_down, restricted != 0}, v_ext, v_h, density, {}, revision, iteration};

	std::size_t nch = 0;
	std::getline(in, line);
	{
		std::istringstream ss(line);
		ss >> tag >> nch;
		if(tag != "channels") throw std::runtime_error("checkpoint: malformed channel count");
	}
	for(std::size_t c = 0; c < nch; c++) {
		channel_state ch;
		std::getline(in, line);
		std::istringstream ss(line);
		std::string occ, lumo, rp, re;
		std::size_t ne = 0;
		ss >> tag >> occ >> ch.occupied >> lumo >> rp >> re >> ne;
		if(tag != "channel" || !ss) throw std::runtime_error("checkpoint: malformed channel line");
		ch.occupancy = parse_double(occ);
		ch.lumo = parse_double(lumo);
		ch.residual_photon = parse_double(rp);
		ch.residual_electron = parse_double(re);
		for(std::size_t k = 0; k < ne; k++) {
			std::string e;
			ss >> e;
			ch.energies.push_back(parse_double(e));
		}
		ch.orbitals = detail::read_list(in, "orbitals");
		ch.v_x_electron = detail::read_named(in, "v_x_electron");
		ch.v_x_photon = detail::read_named(in, "v_x_photon");

		std::size_t nrows = 0;
		std::getline(in, line);
		{
			std::istringstream sh(line);
			sh >> tag >> ch.shifts.revision >> nrows;
			if(tag != "shifts") throw std::runtime_error("checkpoint: malformed shifts line");
		}
		ch.shifts.phi1 = detail::unflatten(detail::read_list(in, "phi1"), nrows);
		ch.shifts.phi2 = detail::unflatten(detail::read_list(in, "phi2"), nrows);
		ch.shifts.M = detail::read_list(in, "M");
		ch.shifts.Lambda = detail::read_list(in, "Lambda");
		ch.shifts.psi = detail::read_list(in, "psi");
		ch.psi_photon = detail::read_list(in, "psi_photon");
		ch.psi_electron = detail::read_list(in, "psi_electron");
		if(!ch.orbitals.empty() && ch.shifts.phi1.size() == ch.orbitals.size()) {
			ks_system ks(ks_hamiltonian(v_ext, units, order), ch.orbitals, ch.energies);
			for(auto const & mode : modes) ch.shifts.dipole.push_back(dipole_matrix(ks, mode));
		}
		st.channels.push_back(std::move(ch));
	}
	return {std::move(st), std::move(log)};
}

inline void save_checkpoint(std::string const & path, ks_state const & st, std::vector<iteration_record> const & log) {
	std::ofstream out(path);
	if(!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
	write_checkpoint(out, st, log);
}

inline checkpoint_data load_checkpoint(std::string const & path, std::vector<photon_mode> const & modes) {
	std::ifstream in(path);
	if(!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
	return read_checkpoint(in, modes);
}

}

#endif
