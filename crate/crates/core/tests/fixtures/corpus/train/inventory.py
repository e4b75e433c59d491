from typing import Dict, List, Set


class Item:
    def __init__(self, code: str, weight: float) -> None:
        self.code = code
        self.weight = weight


class Shelf:
    def __init__(self, capacity: int) -> None:
        self.capacity = capacity
        self.items: List[Item] = []

    def put(self, item: Item) -> bool:
        fits: bool = len(self.items) < self.capacity
        if fits:
            self.items.append(item)
        return fits

    def codes(self) -> Set[str]:
        found: Set[str] = {item.code for item in self.items}
        return found

    def heaviest(self) -> Item:
        top: Item = max(self.items, key=lambda i: i.weight)
        return top


def total_weight(shelf: Shelf) -> float:
    weight: float = 0.0
    for item in shelf.items:
        weight += item.weight
    return weight


def count_by_code(items: List[Item]) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for item in items:
        counts[item.code] = counts.get(item.code, 0) + 1
    return counts


def make_shelf(size: int) -> Shelf:
    shelf: Shelf = Shelf(size)
    return shelf
