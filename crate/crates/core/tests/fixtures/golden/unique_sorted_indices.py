
from typing import List


def unique_sorted_indices(energies: List[float]) -> List[int]:
    energy_dict = {}  
    for idx, energy in enumerate(energies):
        energy_dict.setdefault(energy, idx)
    sorted_unique_energies = sorted(set(energies)) 
    unique_sorted_indices = [energy_dict[energy] for energy in sorted_unique_energies]
    return unique_sorted_indices

assert unique_sorted_indices([10.5, 8.2, 10.5, 7.1, 8.2]) == [3, 1, 0]
